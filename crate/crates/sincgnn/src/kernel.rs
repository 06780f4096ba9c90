//! Truncated Gaussian, the regularized sinc kernel g = sinc·G_{M,r}, its scaled
//! form K(y) = g(y/h), and derivatives up to order two.
//!
//! The truncated functions and all their derivatives are defined to be 0 for
//! |u| ≥ M, including the endpoints. The `*_untruncated` and multiprecision
//! variants give the smooth kernel, which is what quadrature tables use on the
//! closed support.

use std::f64::consts::PI;

use rug::float::Constant;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{cos_pi, sin_pi, sinc};

/// Parameter bundle tying truncation, Gaussian width, lattice step, sample
/// range and quadrature aspect ratio together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Truncation half-width, in units of the lattice step.
    pub m: u32,
    /// Gaussian width.
    pub r: f64,
    /// Lattice step.
    pub h: f64,
    /// Sample half-range N.
    pub n_half: u32,
    /// Aspect ratio M/(4 L_s) of the quadrature grid.
    pub beta: f64,
}

pub const DEFAULT_BETA: f64 = 0.05;

impl KernelParams {
    /// N = M/2, r = √M, h = 4/M.
    pub fn with_defaults(m: u32, beta: f64) -> Result<Self> {
        if m == 0 || !m.is_multiple_of(2) {
            return Err(Error::Config(format!("M must be a positive even integer, got {m}")));
        }
        Self::new(m, (m as f64).sqrt(), 4.0 / m as f64, m / 2, beta)
    }

    pub fn new(m: u32, r: f64, h: f64, n_half: u32, beta: f64) -> Result<Self> {
        let p = KernelParams { m, r, h, n_half, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("M must be positive".into()));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::Config(format!("r must be positive, got {}", self.r)));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!("h must be positive, got {}", self.h)));
        }
        if self.n_half == 0 {
            return Err(Error::Config("N must be positive".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        let ls = self.m as f64 / (4.0 * self.beta);
        if (ls - ls.round()).abs() > 1e-9 * ls.max(1.0) || ls.round() < 1.0 {
            return Err(Error::Config(format!("L_s = M/(4 beta) = {ls} is not a positive integer")));
        }
        let k = self.h * ls.round();
        if (k - k.round()).abs() > 1e-9 * k.max(1.0) || k.round() < 1.0 {
            return Err(Error::Config(format!(
                "lattice step h = {} is not a multiple of the grid step 1/L_s (h L_s = {k})",
                self.h
            )));
        }
        Ok(())
    }

    /// Smallest panel order L_s = M/(4β); also 1/τ.
    pub fn l_s(&self) -> i64 {
        (self.m as f64 / (4.0 * self.beta)).round() as i64
    }

    /// Grid step τ = 1/L_s.
    pub fn tau(&self) -> f64 {
        1.0 / self.l_s() as f64
    }

    /// Number of grid steps per lattice step, h/τ.
    pub fn stride(&self) -> i64 {
        (self.h * self.l_s() as f64).round() as i64
    }

    /// Half-width hM of the computation range.
    pub fn support(&self) -> f64 {
        self.h * self.m as f64
    }

    /// Number of grid steps in hM.
    pub fn support_steps(&self) -> i64 {
        self.stride() * self.m as i64
    }
}

pub fn gauss_trunc(y: f64, m: u32, r: f64) -> f64 {
    if y.abs() <= m as f64 {
        (-y * y / (2.0 * r * r)).exp()
    } else {
        0.0
    }
}

pub fn reg_sinc(y: f64, params: &KernelParams) -> f64 {
    sinc(y) * gauss_trunc(y, params.m, params.r)
}

/// s-th derivative of sinc·G_{M,r}; zero for |y| ≥ M.
pub fn reg_sinc_deriv(y: f64, order: u32, params: &KernelParams) -> f64 {
    assert!(order <= 2, "derivatives are available up to order 2");
    if y.abs() >= params.m as f64 {
        return 0.0;
    }
    sinc_gauss_derivs(y, params.r)[order as usize]
}

/// K''(y) = h⁻² g''(y/h) for the scaled kernel K(y) = g(y/h).
pub fn scaled_kernel_second_deriv(y: f64, params: &KernelParams) -> f64 {
    reg_sinc_deriv(y / params.h, 2, params) / (params.h * params.h)
}

pub fn scaled_kernel(y: f64, params: &KernelParams) -> f64 {
    reg_sinc(y / params.h, params)
}

/// Value and first two derivatives of the untruncated scaled kernel
/// φ(y) = sinc(y/h)·exp(−(y/h)²/2r²).
pub fn scaled_kernel_untruncated(y: f64, params: &KernelParams) -> [f64; 3] {
    let [g0, g1, g2] = sinc_gauss_derivs(y / params.h, params.r);
    let ih = 1.0 / params.h;
    [g0, g1 * ih, g2 * ih * ih]
}

const SERIES_CUTOFF: f64 = 0.25;

/// Sinc and its first two derivatives.
pub fn sinc_derivs(u: f64) -> [f64; 3] {
    if u.abs() < SERIES_CUTOFF {
        return sinc_derivs_series(u);
    }
    let t = PI * u;
    let (s, c) = (sin_pi(u), cos_pi(u));
    [s / t, (t * c - s) / (PI * u * u), ((2.0 - t * t) * s - 2.0 * t * c) / (PI * u * u * u)]
}

fn sinc_derivs_series(u: f64) -> [f64; 3] {
    // sinc(u) = Σ c_k u^{2k}, c_k = (−π²)^k / (2k+1)!
    let u2 = u * u;
    let mut c = 1.0;
    let mut p = 1.0; // u^{2k}
    let (mut s0, mut s1, mut s2) = (1.0, 0.0, 0.0);
    for k in 1..14 {
        let kf = k as f64;
        c *= -PI * PI / ((2.0 * kf) * (2.0 * kf + 1.0));
        s1 += 2.0 * kf * c * p * u;
        s2 += 2.0 * kf * (2.0 * kf - 1.0) * c * p;
        p *= u2;
        s0 += c * p;
    }
    [s0, s1, s2]
}

/// g = sinc·G_r (untruncated) with g' and g''.
pub fn sinc_gauss_derivs(u: f64, r: f64) -> [f64; 3] {
    let [s0, s1, s2] = sinc_derivs(u);
    let ir2 = 1.0 / (r * r);
    let g = (-u * u * ir2 / 2.0).exp();
    let g1 = -u * ir2 * g;
    let g2 = (u * u * ir2 * ir2 - ir2) * g;
    [s0 * g, s1 * g + s0 * g1, s2 * g + 2.0 * s1 * g1 + s0 * g2]
}

/// Multiprecision g, g', g'' of the untruncated kernel at `u`, rounded to
/// `prec` bits. `r2` is r² as an exact value.
pub fn sinc_gauss_derivs_mp(u: &Float, r2: &Float, prec: u32) -> [Float; 3] {
    if u.is_zero() {
        let pi = Float::with_val(prec + 16, Constant::Pi);
        let g2 = -(Float::with_val(prec + 16, &pi * &pi) / 3u32) - Float::with_val(prec + 16, 1u32 / r2);
        return [Float::with_val(prec, 1u32), Float::with_val(prec, 0u32), Float::with_val(prec, g2)];
    }
    // the closed forms lose up to 4·log2(1/|u|) bits to cancellation
    let loss = (-u.get_exp().unwrap_or(0)).max(0) as u32;
    let wp = prec + 64 + 4 * loss;
    let u = Float::with_val(wp, u);
    let r2 = Float::with_val(wp, r2);
    let pi = Float::with_val(wp, Constant::Pi);
    let t = Float::with_val(wp, &pi * &u);
    let (sin, cos) = t.clone().sin_cos(Float::new(wp));
    let u2 = Float::with_val(wp, u.square_ref());
    let u3 = Float::with_val(wp, &u2 * &u);
    let t2 = Float::with_val(wp, t.square_ref());
    let tc = Float::with_val(wp, &t * &cos);

    let s0 = Float::with_val(wp, &sin / &t);
    let s1 = Float::with_val(wp, &tc - &sin) / Float::with_val(wp, &pi * &u2);
    let s2 =
        (Float::with_val(wp, 2u32 - &t2) * &sin - Float::with_val(wp, &tc * 2u32)) / Float::with_val(wp, &pi * &u3);

    let g = Float::with_val(wp, -Float::with_val(wp, &u2 / &r2) / 2u32).exp();
    let g1 = -Float::with_val(wp, &u / &r2) * &g;
    let ir2 = Float::with_val(wp, 1u32 / &r2);
    let g2 = (Float::with_val(wp, &u2 * &ir2) * &ir2 - &ir2) * &g;

    let v0 = Float::with_val(prec, &s0 * &g);
    let v1 = Float::with_val(prec, Float::with_val(wp, &s1 * &g) + Float::with_val(wp, &s0 * &g1));
    let v2 = Float::with_val(
        prec,
        Float::with_val(wp, &s2 * &g) + Float::with_val(wp, &s1 * &g1) * 2u32 + Float::with_val(wp, &s0 * &g2),
    );
    [v0, v1, v2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(m: u32) -> KernelParams {
        KernelParams::with_defaults(m, DEFAULT_BETA).unwrap()
    }

    fn p_r(m: u32, r: f64) -> KernelParams {
        KernelParams { m, r, h: 4.0 / m as f64, n_half: m / 2, beta: 0.125 }
    }

    #[test]
    fn defaults_and_derived() {
        let k = p(8);
        assert_eq!(k.n_half, 4);
        assert_eq!(k.h, 0.5);
        assert_eq!(k.l_s(), 40);
        assert_eq!(k.stride(), 20);
        assert_eq!(k.support_steps(), 160);
        let k = KernelParams::with_defaults(4, 0.125).unwrap();
        assert_eq!(k.l_s(), 8);
        assert_eq!(k.tau(), 0.125);
        assert!(KernelParams::with_defaults(5, 0.05).is_err());
        assert!(KernelParams::with_defaults(8, 0.3).is_err());
        assert!(KernelParams::with_defaults(8, 0.03).is_err());
    }

    #[test]
    fn gauss_examples() {
        assert_eq!(gauss_trunc(0.0, 4, 2.0), 1.0);
        assert_eq!(gauss_trunc(4.1, 4, 2.0), 0.0);
        assert!((gauss_trunc(2.0, 4, 2.0) - (-0.5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn reg_sinc_examples() {
        let k = p_r(4, 2.0);
        assert_eq!(reg_sinc(0.0, &k), 1.0);
        assert_eq!(reg_sinc(1.0, &k), 0.0);
        let want = 2.0 / PI * (-1.0f64 / 32.0).exp();
        assert!((reg_sinc(0.5, &k) - want).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let k = p_r(4, 2.0);
        assert_eq!(reg_sinc_deriv(4.0, 2, &k), 0.0);
        assert_eq!(reg_sinc_deriv(-4.0, 2, &k), 0.0);
        assert_eq!(reg_sinc_deriv(0.0, 1, &k), 0.0);
        let want = -PI * PI / 3.0 - 0.25;
        assert!((reg_sinc_deriv(0.0, 2, &k) - want).abs() < 1e-14);
        let step = 1e-5;
        let fd = (reg_sinc(step, &k) - 2.0 * reg_sinc(0.0, &k) + reg_sinc(-step, &k)) / (step * step);
        assert!((fd - want).abs() < 1e-4);
    }

    #[test]
    fn scaled_second_derivative() {
        let k = p(8);
        assert_eq!(scaled_kernel_second_deriv(k.support(), &k), 0.0);
        let got = scaled_kernel_second_deriv(0.25, &k);
        assert!((got - 4.0 * reg_sinc_deriv(0.5, 2, &k)).abs() < 1e-14);
        let k4 = p_r(4, 2.0);
        assert_eq!(scaled_kernel_second_deriv(0.0, &k4), reg_sinc_deriv(0.0, 2, &k4));
        // chain rule against differences of K
        let y = 0.25;
        let e = 1e-4;
        let fd = (scaled_kernel(y + e, &k) - 2.0 * scaled_kernel(y, &k) + scaled_kernel(y - e, &k)) / (e * e);
        assert!((fd - got).abs() < 1e-5 * (1.0 + got.abs()));
    }

    #[test]
    fn ibp_hypothesis_far_out() {
        for m in [4u32, 8, 16] {
            let k = p(m);
            let y = 10.0 * k.r;
            let [g0, g1, _] = sinc_gauss_derivs(y, k.r);
            assert!(g0.abs() < 1e-8 && g1.abs() < 1e-8);
        }
    }

    #[test]
    fn multiprecision_matches_double() {
        let r = 8f64.sqrt();
        let r2 = Float::with_val(200, r) * Float::with_val(200, r);
        for &u in &[0.0, 1e-3, 0.1, 0.3, 1.7, -2.25, 7.9] {
            let d = sinc_gauss_derivs(u, r);
            let q = sinc_gauss_derivs_mp(&Float::with_val(200, u), &r2, 200);
            for i in 0..3 {
                assert!((q[i].to_f64() - d[i]).abs() < 2e-15 * (1.0 + d[i].abs()), "u={u} i={i}");
            }
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        for &u in &[SERIES_CUTOFF * 0.999, SERIES_CUTOFF * 1.001] {
            let a = sinc_derivs_series(u);
            let t = PI * u;
            let closed = [
                t.sin() / t,
                (t * t.cos() - t.sin()) / (PI * u * u),
                ((2.0 - t * t) * t.sin() - 2.0 * t * t.cos()) / (PI * u * u * u),
            ];
            for i in 0..3 {
                assert!((a[i] - closed[i]).abs() < 1e-13);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn evenness(y in -3.95f64..3.95) {
            let k = p_r(4, 2.0);
            prop_assert_eq!(reg_sinc(-y, &k), reg_sinc(y, &k));
            prop_assert!((reg_sinc_deriv(-y, 1, &k) + reg_sinc_deriv(y, 1, &k)).abs() < 1e-15);
            prop_assert!((reg_sinc_deriv(-y, 2, &k) - reg_sinc_deriv(y, 2, &k)).abs() < 1e-15);
        }

        #[test]
        fn finite_difference_consistency(y in -7.9f64..7.9) {
            let k = p(8);
            let e = 1e-5;
            let f = |t: f64| reg_sinc(t, &k);
            let d1 = reg_sinc_deriv(y, 1, &k);
            let d2 = reg_sinc_deriv(y, 2, &k);
            let fd1 = (f(y + e) - f(y - e)) / (2.0 * e);
            let fd2 = (reg_sinc_deriv(y + e, 1, &k) - reg_sinc_deriv(y - e, 1, &k)) / (2.0 * e);
            prop_assert!((d1 - fd1).abs() <= 1e-5 * (1.0 + d1.abs()));
            prop_assert!((d2 - fd2).abs() <= 1e-5 * (1.0 + d2.abs()));
        }

        #[test]
        fn gaussian_envelope(y in -20.0f64..20.0) {
            let k = p(8);
            prop_assert!(reg_sinc(y, &k).abs() <= (-y * y / (2.0 * k.r * k.r)).exp());
        }
    }
}
