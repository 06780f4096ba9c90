//! Exactly bandlimited test functions built from shifted sinc terms.
//!
//! A [`SignalSpec`] describes f(x) = Σ_j a_j ∏_k sinc(σ x_k/π − j_k). Integer
//! shifts on the Nyquist lattice make the terms orthogonal, so values, norms
//! and samples all have closed forms.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One shifted sinc term of a signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub shift: Vec<i64>,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub sigma: f64,
    pub dim: usize,
    pub terms: Vec<Term>,
}

/// Normalized sinc, sin(πu)/(πu).
///
/// Uses a Taylor polynomial for |u| < 1e-4 and returns an exact zero at
/// nonzero integers.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let t2 = (PI * u) * (PI * u);
        // 1 - t²/3! + t⁴/5! - t⁶/7! + t⁸/9! - t¹⁰/11!
        return 1.0
            + t2 * (-1.0 / 6.0
                + t2 * (1.0 / 120.0 + t2 * (-1.0 / 5040.0 + t2 * (1.0 / 362880.0 + t2 * (-1.0 / 39916800.0)))));
    }
    sin_pi(u) / (PI * u)
}

/// sin(πu) with the argument reduced to [-1/2, 1/2] first, so integers give 0.
pub fn sin_pi(u: f64) -> f64 {
    let k = u.round();
    let s = (PI * (u - k)).sin();
    if (k as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// cos(πu) with the same reduction as [`sin_pi`].
pub fn cos_pi(u: f64) -> f64 {
    let k = u.round();
    let c = (PI * (u - k)).cos();
    if (k as i64) % 2 == 0 {
        c
    } else {
        -c
    }
}

/// Lattice samples f(h·n) for n ∈ [−N, N]^d, stored in row-major order with the
/// last coordinate varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSamples {
    pub dim: usize,
    pub h: f64,
    pub n_half: i64,
    pub values: Vec<f64>,
}

impl LatticeSamples {
    pub fn side(&self) -> usize {
        (2 * self.n_half + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat position of the multi-index `n` (each entry in [−N, N]).
    pub fn offset(&self, n: &[i64]) -> usize {
        let side = self.side() as i64;
        n.iter().fold(0i64, |acc, &nk| acc * side + (nk + self.n_half)) as usize
    }

    pub fn get(&self, n: &[i64]) -> f64 {
        self.values[self.offset(n)]
    }

    /// Multi-index of the flat position `i`.
    pub fn index(&self, mut i: usize) -> Vec<i64> {
        let side = self.side();
        let mut n = vec![0i64; self.dim];
        for k in (0..self.dim).rev() {
            n[k] = (i % side) as i64 - self.n_half;
            i /= side;
        }
        n
    }

    pub fn to_map(&self) -> BTreeMap<Vec<i64>, f64> {
        (0..self.len()).map(|i| (self.index(i), self.values[i])).collect()
    }
}

impl SignalSpec {
    pub fn new(sigma: f64, dim: usize, terms: Vec<Term>) -> Result<Self> {
        let spec = SignalSpec { sigma, dim, terms };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if self.terms.is_empty() {
            return Err(Error::Config("a signal needs at least one term".into()));
        }
        for t in &self.terms {
            if t.shift.len() != self.dim {
                return Err(Error::Config(format!("shift {:?} does not have dimension {}", t.shift, self.dim)));
            }
            if !t.coeff.is_finite() {
                return Err(Error::Config("coefficients must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SignalSpec = serde_json::from_str(text).map_err(|e| Error::Config(format!("signal file: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("signal serializes")
    }

    /// Same signal with every coefficient multiplied by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= a;
        }
        out
    }

    /// Coefficients summed per distinct shift.
    pub fn merged_coeffs(&self) -> BTreeMap<Vec<i64>, f64> {
        let mut map = BTreeMap::new();
        for t in &self.terms {
            *map.entry(t.shift.clone()).or_insert(0.0) += t.coeff;
        }
        map
    }

    /// Largest |j_k| over all shifts.
    pub fn max_shift(&self) -> i64 {
        self.terms.iter().flat_map(|t| t.shift.iter().map(|s| s.abs())).max().unwrap_or(0)
    }
}

pub fn eval_signal(spec: &SignalSpec, x: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), spec.dim);
    let scale = spec.sigma / PI;
    spec.terms
        .iter()
        .map(|t| t.coeff * t.shift.iter().zip(x).map(|(&j, &xk)| sinc(scale * xk - j as f64)).product::<f64>())
        .sum()
}

/// Exact L² norm sqrt((π/σ)^d Σ a_j²), with coefficients of repeated shifts
/// combined first.
pub fn l2_norm(spec: &SignalSpec) -> f64 {
    let sum_sq: f64 = spec.merged_coeffs().values().map(|a| a * a).sum();
    ((PI / spec.sigma).powi(spec.dim as i32) * sum_sq).sqrt()
}

/// Checks the Nyquist condition σ < π/h.
pub fn check_band(sigma: f64, h: f64) -> Result<()> {
    let limit = PI / h;
    if sigma >= limit {
        Err(Error::BandTooWide { sigma, limit })
    } else {
        Ok(())
    }
}

pub fn sample_on_lattice(spec: &SignalSpec, h: f64, n_half: i64) -> Result<LatticeSamples> {
    check_band(spec.sigma, h)?;
    let side = (2 * n_half + 1) as usize;
    let count = side.pow(spec.dim as u32);
    let mut out = LatticeSamples { dim: spec.dim, h, n_half, values: Vec::with_capacity(count) };
    let mut x = vec![0.0; spec.dim];
    for i in 0..count {
        let n = out.index(i);
        for (xk, nk) in x.iter_mut().zip(&n) {
            *xk = h * *nk as f64;
        }
        out.values.push(eval_signal(spec, &x));
    }
    Ok(out)
}

/// Deterministic random signal with unit L² norm.
///
/// Shifts are `n_terms` distinct points drawn uniformly from [−n_terms, n_terms]^d,
/// coefficients are standard normal, and the result is rescaled to unit norm.
/// The generator is ChaCha8 seeded with `seed`.
pub fn random_signal(sigma: f64, dim: usize, n_terms: usize, seed: u64) -> SignalSpec {
    assert!(n_terms >= 1, "n_terms must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = 2 * n_terms + 1;
    let cells = side.pow(dim as u32);
    let picks = index::sample(&mut rng, cells, n_terms.min(cells));
    let mut terms: Vec<Term> = picks
        .iter()
        .map(|mut c| {
            let mut shift = vec![0i64; dim];
            for k in (0..dim).rev() {
                shift[k] = (c % side) as i64 - n_terms as i64;
                c /= side;
            }
            let coeff: f64 = StandardNormal.sample(&mut rng);
            Term { shift, coeff }
        })
        .collect();
    terms.sort_by(|a, b| a.shift.cmp(&b.shift));
    let spec = SignalSpec { sigma, dim, terms };
    let norm = l2_norm(&spec);
    spec.scaled(1.0 / norm)
}

/// Σ_{n ∈ Z^d} f(n)² for a σ = π signal. Samples vanish off the shift set, so
/// the sum runs over a box that covers every shift with a margin of one.
pub fn lattice_energy(spec: &SignalSpec) -> f64 {
    let r = spec.max_shift() + 1;
    let side = (2 * r + 1) as usize;
    let count = side.pow(spec.dim as u32);
    let mut x = vec![0.0; spec.dim];
    let mut acc = 0.0;
    for mut c in 0..count {
        for k in (0..spec.dim).rev() {
            x[k] = ((c % side) as i64 - r) as f64 * PI / spec.sigma;
            c /= side;
        }
        let v = eval_signal(spec, &x);
        acc += v * v;
    }
    acc
}
