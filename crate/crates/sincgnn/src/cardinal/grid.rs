use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::numeric::{box_indices, fmt17};
use crate::signal::{eval_signal, SignalSpec};

/// Uniform grid lo + step·k in each coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub step: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridSpec {
    pub fn new(dim: usize, step: f64, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let g = GridSpec { dim, step, lo, hi };
        g.validate()?;
        Ok(g)
    }

    pub fn cube(dim: usize, step: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(dim, step, vec![lo; dim], vec![hi; dim])
    }

    /// [−1, 1]^d on the τ-grid.
    pub fn prediction(params: &KernelParams, dim: usize) -> Self {
        Self::cube(dim, params.tau(), -1.0, 1.0).expect("τ = 1/L_s divides 2")
    }

    /// [−hM, hM]^d on the τ-grid.
    pub fn computation(params: &KernelParams, dim: usize) -> Self {
        let s = params.support();
        Self::cube(dim, params.tau(), -s, s).expect("hM is a multiple of τ")
    }

    /// The sample lattice h·[−N, N]^d.
    pub fn sampling(params: &KernelParams, dim: usize) -> Self {
        let s = params.h * params.n_half as f64;
        Self::cube(dim, params.h, -s, s).expect("hN is a multiple of h")
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.len() != self.dim || self.hi.len() != self.dim {
            return Err(Error::Config("grid bounds must have one entry per coordinate".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("grid step must be positive, got {}", self.step)));
        }
        for (a, b) in self.lo.iter().zip(&self.hi) {
            if b < a {
                continue;
            }
            let q = (b - a) / self.step;
            if (q - q.round()).abs() > 1e-9 * q.max(1.0) {
                return Err(Error::Config(format!("extent {} is not a multiple of the step {}", b - a, self.step)));
            }
        }
        Ok(())
    }

    /// Points per coordinate; 0 for an empty range.
    pub fn counts(&self) -> Vec<usize> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| if b < a { 0 } else { ((b - a) / self.step).round() as usize + 1 })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.counts().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Integer offsets k of every point, row-major with the last coordinate fastest.
    pub fn offsets(&self) -> Vec<Vec<i64>> {
        let c = self.counts();
        if c.contains(&0) {
            return Vec::new();
        }
        let hi: Vec<i64> = c.iter().map(|&n| n as i64 - 1).collect();
        box_indices(&vec![0; self.dim], &hi)
    }

    pub fn point(&self, k: &[i64]) -> Vec<f64> {
        self.lo.iter().zip(k).map(|(a, &kk)| a + self.step * kk as f64).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.offsets().iter().map(|k| self.point(k)).collect()
    }
}

/// Signed error f − approx at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub x: Vec<f64>,
    pub f: f64,
    pub approx: f64,
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub sup_err: f64,
    /// Trapezoid-weighted discrete L² norm of the error.
    pub l2_err: f64,
    /// Central-difference H¹ seminorm of the error, interior points only.
    pub h1_err: Option<f64>,
    /// Central-difference H² seminorm of the error, interior points only.
    pub h2_err: Option<f64>,
    pub per_point: Vec<PointError>,
}

impl ErrorReport {
    /// Columns x_1..x_d, f, approx, err, then a two-line aggregate block
    /// `sup_err,l2_err,h1_err,h2_err` with its values (empty when absent).
    pub fn to_csv(&self, dim: usize) -> String {
        let mut s = String::new();
        for k in 1..=dim {
            let _ = write!(s, "x_{k},");
        }
        s.push_str("f,approx,err\n");
        for p in &self.per_point {
            for x in &p.x {
                let _ = write!(s, "{},", fmt17(*x));
            }
            let _ = writeln!(s, "{},{},{}", fmt17(p.f), fmt17(p.approx), fmt17(p.err));
        }
        let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        let _ = writeln!(s, "sup_err,l2_err,h1_err,h2_err");
        let _ = writeln!(s, "{},{},{},{}", fmt17(self.sup_err), fmt17(self.l2_err), opt(self.h1_err), opt(self.h2_err));
        s
    }
}

fn on_kink(x: f64, kink_step: Option<f64>) -> bool {
    match kink_step {
        Some(h) => {
            let q = x / h;
            (q - q.round()).abs() < 1e-9
        }
        None => false,
    }
}

/// Errors of `approx` against the exact signal on `grid`.
///
/// `sobolev_order` (0..=2) selects which difference seminorms are computed.
/// Stencils centered on points where x_k/`kink_step` is an integer are left out
/// for the coordinates they differentiate, since the truncated approximants
/// have kinks there.
pub fn measure_error<F>(
    approx: F,
    spec: &SignalSpec,
    grid: &GridSpec,
    sobolev_order: u32,
    kink_step: Option<f64>,
) -> Result<ErrorReport>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if sobolev_order > 2 {
        return Err(Error::Config(format!("Sobolev order {sobolev_order} exceeds 2")));
    }
    if spec.dim != grid.dim {
        return Err(Error::Config("signal and grid dimensions differ".into()));
    }
    let tol = 1e-12;
    for (a, b) in grid.lo.iter().zip(&grid.hi) {
        if b >= a && (*a < -1.0 - tol || *b > 1.0 + tol) {
            let v = if *a < -1.0 - tol { *a } else { *b };
            return Err(Error::DomainError { value: v, lo: -1.0, hi: 1.0 });
        }
    }
    let counts = grid.counts();
    let offsets = grid.offsets();
    let mut per_point = Vec::with_capacity(offsets.len());
    for k in &offsets {
        let x = grid.point(k);
        let f = eval_signal(spec, &x);
        let a = approx(&x)?;
        per_point.push(PointError { x, f, approx: a, err: f - a });
    }
    let sup_err = per_point.iter().fold(0.0f64, |m, p| m.max(p.err.abs()));
    let d = grid.dim;
    let tau = grid.step;
    let flat = |k: &[i64]| -> usize { k.iter().zip(&counts).fold(0usize, |acc, (&kk, &c)| acc * c + kk as usize) };
    let mut l2 = 0.0;
    for (k, p) in offsets.iter().zip(&per_point) {
        let w: f64 = k
            .iter()
            .zip(&counts)
            .map(|(&kk, &c)| if c > 1 && (kk == 0 || kk as usize == c - 1) { tau / 2.0 } else { tau })
            .product();
        l2 += w * p.err * p.err;
    }
    let e = |k: &[i64]| per_point[flat(k)].err;
    let interior = |k: &[i64]| k.iter().zip(&counts).all(|(&kk, &c)| kk >= 1 && (kk as usize) + 1 < c);
    let wi = tau.powi(d as i32);
    let mut h1 = None;
    let mut h2 = None;
    if sobolev_order >= 1 {
        let mut acc = 0.0;
        for k in offsets.iter().filter(|k| interior(k)) {
            let x = grid.point(k);
            for c in 0..d {
                if on_kink(x[c], kink_step) {
                    continue;
                }
                let mut kp = k.clone();
                let mut km = k.clone();
                kp[c] += 1;
                km[c] -= 1;
                let g = (e(&kp) - e(&km)) / (2.0 * tau);
                acc += wi * g * g;
            }
        }
        h1 = Some(acc.sqrt());
    }
    if sobolev_order >= 2 {
        let mut acc = 0.0;
        for k in offsets.iter().filter(|k| interior(k)) {
            let x = grid.point(k);
            for a in 0..d {
                for b in a..d {
                    if on_kink(x[a], kink_step) || on_kink(x[b], kink_step) {
                        continue;
                    }
                    let v = if a == b {
                        let mut kp = k.clone();
                        let mut km = k.clone();
                        kp[a] += 1;
                        km[a] -= 1;
                        (e(&kp) - 2.0 * e(k) + e(&km)) / (tau * tau)
                    } else {
                        let shifted = |sa: i64, sb: i64| {
                            let mut q = k.clone();
                            q[a] += sa;
                            q[b] += sb;
                            e(&q)
                        };
                        (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4.0 * tau * tau)
                    };
                    let mult = if a == b { 1.0 } else { 2.0 };
                    acc += mult * wi * v * v;
                }
            }
        }
        h2 = Some(acc.sqrt());
    }
    Ok(ErrorReport { sup_err, l2_err: l2.sqrt(), h1_err: h1, h2_err: h2, per_point })
}
