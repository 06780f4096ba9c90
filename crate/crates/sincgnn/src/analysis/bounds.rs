//! Space-side checks: the L² error bracket of the regularized series, the
//! integration-by-parts identity behind the proxy network and the
//! regularized-versus-proxy residual.

use serde::Serialize;

use super::spectral::nu_tr;
use crate::cardinal::{psi_proxy_grid, r_series, r_tilde_samples, GridSpec};
use crate::error::{Error, Result};
use crate::kernel::{scaled_kernel_untruncated, KernelParams};
use crate::numeric::CompensatedSum;
use crate::quadrature::QuadratureOracle;
use crate::signal::{eval_signal, l2_norm, sample_on_lattice, SignalSpec};

/// Half-width of the window the L² error is integrated over.
pub const BRACKET_WINDOW: f64 = 300.0;
/// Grid points per lattice step in that integration.
pub const BRACKET_REFINE: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketReport {
    pub m: u32,
    pub error_l2: f64,
    pub norm: f64,
    pub nu_zero: f64,
    pub nu_sigma: f64,
    /// min{ν_tr(0), ν_tr(hσ)}·‖f‖₂.
    pub lower: f64,
    /// √2·max{ν_tr(0), ν_tr(hσ)}·‖f‖₂.
    pub upper: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Compares ‖R f − f‖₂ with the two-sided ν_tr bracket, allowing `margin` in
/// relative terms on both sides.
pub fn prop4_bracket(spec: &SignalSpec, params: &KernelParams, margin: f64) -> Result<BracketReport> {
    if spec.dim != 1 {
        return Err(Error::Config("the bracket check is one-dimensional".into()));
    }
    let step = params.h / BRACKET_REFINE;
    let n = (BRACKET_WINDOW / step).round() as i64;
    let mut acc = CompensatedSum::new();
    for i in -n..=n {
        let x = i as f64 * step;
        let e = r_series(spec, params, &[x])? - eval_signal(spec, &[x]);
        let w = if i.abs() == n { 0.5 } else { 1.0 };
        acc.add(w * e * e);
    }
    let error_l2 = (acc.value() * step).sqrt();
    let norm = l2_norm(spec);
    let nu_zero = nu_tr(0.0, params)?;
    let nu_sigma = nu_tr(params.h * spec.sigma, params)?;
    let lower = nu_zero.min(nu_sigma) * norm;
    let upper = std::f64::consts::SQRT_2 * nu_zero.max(nu_sigma) * norm;
    let holds = (1.0 - margin) * lower <= error_l2 && error_l2 <= (1.0 + margin) * upper;
    Ok(BracketReport { m: params.m, error_l2, norm, nu_zero, nu_sigma, lower, upper, margin, holds })
}

/// Standard deviations of the kernel's Gaussian covered on each side.
const IBP_SPAN: f64 = 6.0;

/// (φ(x − X), ∫ ReLU(x − X − y)·φ''(y) dy) for the untruncated kernel φ, with
/// the integral over y ∈ [−6rh, x − X].
pub fn ibp_identity(big_x: f64, x: f64, params: &KernelParams, oracle: &QuadratureOracle) -> Result<(f64, f64)> {
    let b = x - big_x;
    let lhs = scaled_kernel_untruncated(b, params)[0];
    let lo = -IBP_SPAN * params.r * params.h;
    if b <= lo {
        return Ok((lhs, 0.0));
    }
    let f = |y: f64| (b - y) * scaled_kernel_untruncated(y, params)[2];
    let mut breaks = vec![lo];
    // the sinc derivatives switch to a series near 0
    if lo < 0.0 && 0.0 < b {
        breaks.push(0.0);
    }
    breaks.push(b);
    let o = QuadratureOracle { abs_tol: oracle.abs_tol.max(1e-13), ..*oracle };
    Ok((lhs, o.integrate_pieces(&f, &breaks)?.value))
}

/// sup over the prediction grid of |R̃ f − Σ f(hn⃗)·∏ conv|, with every
/// convolution from the oracle.
pub fn proxy_residual(spec: &SignalSpec, params: &KernelParams, oracle: &QuadratureOracle) -> Result<f64> {
    let samples = sample_on_lattice(spec, params.h, params.n_half as i64)?;
    let points = GridSpec::prediction(params, spec.dim).points();
    let proxy = psi_proxy_grid(&samples, params, &points, oracle)?;
    Ok(points.iter().zip(&proxy).map(|(x, p)| (r_tilde_samples(&samples, params, x) - p).abs()).fold(0.0, f64::max))
}
