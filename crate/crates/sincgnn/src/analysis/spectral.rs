//! Frequency-side quantities of the truncated Gaussian: ν_tr, Gaussian tail
//! bounds and the Fourier transform Ĝ_{M,r}.

use std::f64::consts::PI;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::quadrature::QuadratureOracle;

const TAIL_PREC: u32 = 128;

/// Standard deviations integrated past M/r in the oscillatory term.
const TAIL_CUTOFF: f64 = 10.0;

/// ½·erfc(x/√2) at 128 bits, rounded once.
fn half_erfc(x: f64) -> f64 {
    let s = Float::with_val(TAIL_PREC, x) / Float::with_val(TAIL_PREC, 2).sqrt();
    (s.erfc() / 2u32).to_f64()
}

/// ∫_x^∞ e^{−t²/2} dt.
pub fn gauss_tail(x: f64) -> f64 {
    let s = Float::with_val(TAIL_PREC, x) / Float::with_val(TAIL_PREC, 2).sqrt();
    let c = (Float::with_val(TAIL_PREC, rug::float::Constant::Pi) / 2u32).sqrt();
    (s.erfc() * c).to_f64()
}

/// (m_low(x), ∫_x^∞ e^{−t²/2} dt, m_up(x)) for x > 0.
pub fn mills_bounds(x: f64) -> (f64, f64, f64) {
    let e = (-0.5 * x * x).exp();
    let low = PI * e / ((x * x + 2.0 * PI).sqrt() + (PI - 1.0) * x);
    let up = PI * e / (((PI - 2.0) * (PI - 2.0) * x * x + 2.0 * PI).sqrt() + 2.0 * x);
    (low, gauss_tail(x), up)
}

/// The two parts of ν_tr(w): the Gaussian mass outside r(w + [−π, π]) and
/// the oscillatory correction from truncating at M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuParts {
    pub tail: f64,
    pub truncation: f64,
}

impl NuParts {
    pub fn value(&self) -> f64 {
        self.tail + self.truncation
    }
}

pub fn nu_tr_parts(w: f64, params: &KernelParams, oracle: &QuadratureOracle) -> Result<NuParts> {
    if w.is_nan() || w.abs() > PI {
        return Err(Error::DomainError { value: w, lo: -PI, hi: PI });
    }
    let r = params.r;
    let tail = half_erfc(r * (PI + w)) + half_erfc(r * (PI - w));
    let a = params.m as f64 / r;
    let f = |y: f64| (-0.5 * y * y).exp() * (r * PI * y).sin() * (r * w * y).cos() / y;
    // one break per half period of the faster oscillation
    let period = 1.0 / (r * (PI + w.abs()) / PI).max(1.0);
    let pieces = (TAIL_CUTOFF / period).ceil() as usize;
    let mut breaks = Vec::with_capacity(pieces + 1);
    for i in 0..=pieces {
        breaks.push(a + TAIL_CUTOFF * i as f64 / pieces as f64);
    }
    let o = QuadratureOracle { abs_tol: oracle.abs_tol.max(1e-18), ..*oracle };
    let est = o.integrate_pieces(&f, &breaks)?;
    Ok(NuParts { tail, truncation: 2.0 / PI * est.value })
}

/// ν_tr(w) for |w| ≤ π.
pub fn nu_tr(w: f64, params: &KernelParams) -> Result<f64> {
    Ok(nu_tr_parts(w, params, &QuadratureOracle::default())?.value())
}

/// α = min{M/r, r(π − hσ)}, the exponent scale of ν_tr(hσ).
pub fn nu_alpha(sigma: f64, params: &KernelParams) -> f64 {
    (params.m as f64 / params.r).min(params.r * (PI - params.h * sigma))
}

/// (w, ν_tr(h·w)) sampled on [0, σ].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuProfile {
    pub sigma: f64,
    pub params: KernelParams,
    pub samples: Vec<(f64, f64)>,
}

impl NuProfile {
    /// `points` ≥ 2 equispaced samples including both ends.
    pub fn new(sigma: f64, params: &KernelParams, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Config("a profile needs at least two points".into()));
        }
        let mut samples = Vec::with_capacity(points);
        for i in 0..points {
            let w = sigma * i as f64 / (points - 1) as f64;
            samples.push((w, nu_tr(params.h * w, params)?));
        }
        Ok(NuProfile { sigma, params: *params, samples })
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    pub fn all_in_unit_interval(&self) -> bool {
        self.samples.iter().all(|&(_, v)| v > 0.0 && v < 1.0)
    }

    /// Sign changes of the forward differences on [−σ, σ]. By evenness the
    /// profile on [−σ, 0] is the mirror image, which contributes exactly one
    /// change at w = 0 when the profile is monotone on [0, σ].
    pub fn derivative_sign_changes(&self) -> usize {
        let v = self.values();
        let mut full: Vec<f64> = v.iter().rev().cloned().collect();
        full.extend_from_slice(&v[1..]);
        let signs: Vec<f64> = full.windows(2).map(|w| w[1] - w[0]).filter(|d| *d != 0.0).map(f64::signum).collect();
        signs.windows(2).filter(|s| s[0] != s[1]).count()
    }

    /// Whether the minimum and maximum over the samples occur at w ∈ {0, σ}.
    pub fn extrema_at_endpoints(&self) -> bool {
        let v = self.values();
        let last = v.len() - 1;
        let (mut imin, mut imax) = (0, 0);
        for (i, x) in v.iter().enumerate() {
            if *x < v[imin] {
                imin = i;
            }
            if *x > v[imax] {
                imax = i;
            }
        }
        (imin == 0 || imin == last) && (imax == 0 || imax == last)
    }

    pub fn endpoint_values(&self) -> (f64, f64) {
        (self.samples[0].1, self.samples[self.samples.len() - 1].1)
    }
}

/// Ĝ_{M,r}(w) = ∫_{−M}^{M} e^{−y²/2r²} cos(wy) dy.
pub fn ghat(w: f64, m: f64, r: f64, oracle: &QuadratureOracle) -> Result<f64> {
    let f = |y: f64| (-y * y / (2.0 * r * r)).exp() * (w * y).cos();
    // even integrand; resolve each period on [0, M]
    let pieces = ((w.abs() * m / PI).ceil() as usize).clamp(1, 4096);
    let breaks: Vec<f64> = (0..=pieces).map(|i| m * i as f64 / pieces as f64).collect();
    let o = QuadratureOracle { abs_tol: oracle.abs_tol.max(1e-14), ..*oracle };
    Ok(2.0 * o.integrate_pieces(&f, &breaks)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhatReport {
    pub m: f64,
    pub r: f64,
    pub values: Vec<(f64, f64)>,
    pub min: f64,
    pub argmin: f64,
}

/// Ĝ_{M,r} at every grid frequency, with the minimum.
pub fn ghat_nonneg(params: &KernelParams, w_grid: &[f64]) -> Result<GhatReport> {
    let oracle = QuadratureOracle::default();
    let (m, r) = (params.m as f64, params.r);
    let mut values = Vec::with_capacity(w_grid.len());
    let (mut min, mut argmin) = (f64::INFINITY, f64::NAN);
    for &w in w_grid {
        let v = ghat(w, m, r, &oracle)?;
        if v < min {
            min = v;
            argmin = w;
        }
        values.push((w, v));
    }
    Ok(GhatReport { m, r, values, min, argmin })
}
