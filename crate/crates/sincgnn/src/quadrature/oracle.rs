//! Adaptive Gauss–Kronrod (7/15) integrator used as an independent reference.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{scaled_kernel_second_deriv, KernelParams};
use crate::numeric::CompensatedSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Tolerance settings for the reference integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOracle {
    pub target_rel_tol: f64,
    /// Maximum number of interval bisections.
    pub max_refinements: usize,
    /// Absolute tolerance, for integrals whose value may vanish.
    pub abs_tol: f64,
}

impl Default for QuadratureOracle {
    fn default() -> Self {
        QuadratureOracle { target_rel_tol: 1e-12, max_refinements: 4000, abs_tol: 0.0 }
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = hl * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        k += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    Piece { a, b, value: k * hl, error: ((k - g) * hl).abs(), abs: abs * hl.abs() }
}

impl QuadratureOracle {
    pub fn with_tol(target_rel_tol: f64) -> Self {
        QuadratureOracle { target_rel_tol, ..Default::default() }
    }

    /// ∫_a^b f, refining the worst interval until the summed error estimate
    /// is below max(rel_tol·|I|, abs_tol) or hits the rounding floor.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_pieces(&f, &[a, b])
    }

    /// As [`integrate`](Self::integrate) over consecutive breakpoints, which
    /// should include every point where f is not smooth.
    pub fn integrate_pieces<F: Fn(f64) -> f64>(&self, f: &F, breaks: &[f64]) -> Result<Estimate> {
        let mut heap = BinaryHeap::new();
        for w in breaks.windows(2) {
            if w[1] != w[0] {
                heap.push(gk15(f, w[0], w[1]));
            }
        }
        let mut refinements = 0usize;
        loop {
            let (mut val, mut err, mut abs) = (CompensatedSum::new(), 0.0f64, 0.0f64);
            for p in heap.iter() {
                val.add(p.value);
                err += p.error;
                abs += p.abs;
            }
            let value = val.value();
            let floor = 50.0 * f64::EPSILON * abs;
            let tol = (self.target_rel_tol * value.abs()).max(self.abs_tol);
            if err <= tol || err <= floor {
                return Ok(Estimate { value, error: err });
            }
            if refinements >= self.max_refinements {
                return Err(Error::OracleFailure {
                    tol: self.target_rel_tol,
                    estimate: err / value.abs().max(f64::MIN_POSITIVE),
                    refinements,
                });
            }
            let worst = heap.pop().expect("non-empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
                // interval exhausted: accept the estimate as is
                heap.push(Piece { error: 0.0, ..worst });
                continue;
            }
            heap.push(gk15(f, worst.a, mid));
            heap.push(gk15(f, mid, worst.b));
            refinements += 1;
        }
    }
}

/// ∫_{−hM}^{b} (b − y) K''(y) dy with b = x − hn: the convolution of the ramp
/// at hn with the truncated kernel's second derivative.
pub fn oracle_conv(n: i64, x: f64, params: &KernelParams, oracle: &QuadratureOracle) -> Result<f64> {
    let b = x - params.h * n as f64;
    conv_at(b, params, oracle)
}

/// The same integral as [`oracle_conv`] parametrized by its upper limit.
pub fn conv_at(b: f64, params: &KernelParams, oracle: &QuadratureOracle) -> Result<f64> {
    let s = params.support();
    if b <= -s {
        return Ok(0.0);
    }
    let top = b.min(s);
    // kinks of K'' only at ±hM; split at 0 so the peak lands on a boundary
    let mut breaks = vec![-s];
    if top > 0.0 {
        breaks.push(0.0);
    }
    breaks.push(top);
    let f = |y: f64| (b - y) * scaled_kernel_second_deriv(y, params);
    // the integral is O(1) while K'' is O(h⁻²), so relative tolerances on the
    // value alone would be meaningless near a zero of the convolution
    let o = QuadratureOracle { abs_tol: oracle.abs_tol.max(oracle.target_rel_tol * 1e-3), ..*oracle };
    Ok(o.integrate_pieces(&f, &breaks)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{scaled_kernel, KernelParams, DEFAULT_BETA};
    use proptest::prelude::*;

    #[test]
    fn polynomials_and_transcendentals() {
        let o = QuadratureOracle::default();
        let e = o.integrate(|x| x * x * x, 0.0, 2.0).unwrap();
        assert!((e.value - 4.0).abs() < 1e-14);
        let e = o.integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI).unwrap();
        assert!((e.value - 2.0).abs() < 1e-13);
        let e = o.integrate(|x: f64| (-x * x).exp(), -10.0, 10.0).unwrap();
        assert!((e.value - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn failure_is_reported() {
        let o = QuadratureOracle { target_rel_tol: 1e-15, max_refinements: 3, abs_tol: 0.0 };
        let r = o.integrate(|x: f64| (50.0 * x).sin().abs() + 1.0, 0.0, 10.0);
        assert!(matches!(r, Err(Error::OracleFailure { refinements: 3, .. })));
    }

    #[test]
    fn empty_interval() {
        let k = KernelParams::with_defaults(8, DEFAULT_BETA).unwrap();
        let o = QuadratureOracle::default();
        // hn = x + hM
        assert_eq!(oracle_conv(4, -2.0, &k, &o).unwrap(), 0.0);
        assert_eq!(conv_at(-k.support() - 1.0, &k, &o).unwrap(), 0.0);
    }

    #[test]
    fn stays_within_kernel_bound() {
        for m in [4u32, 8, 12] {
            let k = KernelParams::with_defaults(m, DEFAULT_BETA).unwrap();
            let o = QuadratureOracle::default();
            let bound = 400.0 * (m as f64).powf(2.5);
            for i in 0..=40 {
                let b = -k.support() + i as f64 * 3.0 * k.support() / 40.0;
                assert!(conv_at(b, &k, &o).unwrap().abs() < bound);
            }
        }
    }

    /// Integrating by parts gives K(b) − (b + hM)·K'(−hM⁺) while b < hM.
    #[test]
    fn closed_form_by_parts() {
        let k = KernelParams::with_defaults(8, DEFAULT_BETA).unwrap();
        let o = QuadratureOracle::default();
        let slope = crate::kernel::scaled_kernel_untruncated(-k.support(), &k)[1];
        for i in 1..40 {
            let b = -k.support() + i as f64 * 0.1;
            let want = scaled_kernel(b, &k) - (b + k.support()) * slope;
            let got = conv_at(b, &k, &o).unwrap();
            assert!((got - want).abs() < 1e-11, "b={b}: {got} vs {want}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn halving_tolerance_is_consistent(b in -1.9f64..4.0, e in 6i32..11) {
            let k = KernelParams::with_defaults(8, DEFAULT_BETA).unwrap();
            let tol = 10f64.powi(-e);
            let coarse = conv_at(b, &k, &QuadratureOracle::with_tol(tol)).unwrap();
            let fine = conv_at(b, &k, &QuadratureOracle::with_tol(tol / 2.0)).unwrap();
            prop_assert!((coarse - fine).abs() <= tol * coarse.abs().max(1e-3));
        }
    }
}
