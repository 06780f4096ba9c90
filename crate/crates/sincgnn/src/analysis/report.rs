//! Verification suites and their JSON report.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::bounds::{ibp_identity, prop4_bracket};
use super::spectral::{ghat_nonneg, mills_bounds, NuProfile};
use super::tables::{factorial_poly_table, nc_exactness_defect};
use crate::error::{Error, Result};
use crate::kernel::{KernelParams, DEFAULT_BETA};
use crate::network::{mult_approx, mult_exact};
use crate::numeric::log_slope;
use crate::quadrature::QuadratureOracle;
use crate::signal::random_signal;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, Value>,
    pub calibrated: BTreeMap<String, f64>,
    pub tolerance: Option<f64>,
}

impl Check {
    fn new(name: &str, passed: bool, tolerance: Option<f64>) -> Self {
        Check { name: name.into(), passed, measured: BTreeMap::new(), calibrated: BTreeMap::new(), tolerance }
    }

    fn with(mut self, key: &str, v: Value) -> Self {
        self.measured.insert(key.into(), v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Appendix,
    Quadrature,
    Mult,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "appendix" => Ok(Suite::Appendix),
            "quadrature" => Ok(Suite::Quadrature),
            "mult" => Ok(Suite::Mult),
            "all" => Ok(Suite::All),
            _ => Err(Error::Config(format!("unknown suite {s:?}; expected appendix, quadrature, mult or all"))),
        }
    }
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Appendix => "appendix",
            Suite::Quadrature => "quadrature",
            Suite::Mult => "mult",
            Suite::All => "all",
        }
    }
}

pub fn run_suite(suite: Suite) -> Result<VerificationReport> {
    let checks = match suite {
        Suite::Appendix => appendix_checks()?,
        Suite::Quadrature => quadrature_checks()?,
        Suite::Mult => mult_checks()?,
        Suite::All => {
            let mut c = appendix_checks()?;
            c.extend(quadrature_checks()?);
            c.extend(mult_checks()?);
            c
        }
    };
    Ok(VerificationReport { suite: suite.name().into(), passed: checks.iter().all(|c| c.passed), checks })
}

/// 100 log-spaced points in (0.01, 10].
pub fn mills_check() -> Check {
    let mut worst_gap = f64::INFINITY;
    let mut ok = true;
    for i in 0..100 {
        let x = 10f64.powf(-2.0 + 3.0 * (i + 1) as f64 / 100.0);
        let (l, t, u) = mills_bounds(x);
        ok &= l < t && t < u;
        worst_gap = worst_gap.min((t - l).min(u - t) / t);
    }
    Check::new("mills_ordering", ok, None).with("points", json!(100)).with("min_relative_gap", json!(worst_gap))
}

/// ν_tr profiles at σ = π/2 on 101 points: extrema at w ∈ {0, σ}, a single
/// derivative sign change on [−σ, σ], and values in (0, 1).
pub fn nu_checks(ms: &[u32]) -> Result<Vec<Check>> {
    let sigma = PI / 2.0;
    let mut extrema = Check::new("nu_tr_extrema", true, None);
    let mut unit = Check::new("nu_tr_in_unit_interval", true, None);
    for &m in ms {
        let params = KernelParams::with_defaults(m, DEFAULT_BETA)?;
        let prof = NuProfile::new(sigma, &params, 101)?;
        let (v0, vs) = prof.endpoint_values();
        let changes = prof.derivative_sign_changes();
        let at_ends = prof.extrema_at_endpoints() && changes <= 1;
        extrema.passed &= at_ends;
        extrema = extrema
            .with(&format!("M{m}"), json!({"nu_0": v0, "nu_sigma": vs, "sign_changes": changes, "endpoints": at_ends}));
        let vals = prof.values();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        unit.passed &= prof.all_in_unit_interval();
        unit = unit.with(&format!("M{m}"), json!({"min": lo, "max": hi}));
    }
    Ok(vec![extrema, unit])
}

/// Ĝ_{M,r} on 501 points of [0, 50] at M = 4, r = 2.
pub fn ghat_check() -> Result<Check> {
    let params = KernelParams::new(4, 2.0, 1.0, 2, DEFAULT_BETA)?;
    let grid: Vec<f64> = (0..501).map(|i| 0.1 * i as f64).collect();
    let rep = ghat_nonneg(&params, &grid)?;
    let tol = -1e-9;
    Ok(Check::new("ghat_nonneg", rep.min >= tol, Some(tol))
        .with("min", json!(rep.min))
        .with("argmin", json!(rep.argmin)))
}

/// 100 random (X, x) ∈ [−2, 2]² at M = 8.
pub fn ibp_check() -> Result<Check> {
    let params = KernelParams::with_defaults(8, DEFAULT_BETA)?;
    let oracle = QuadratureOracle::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (bx, x) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
        let (l, r) = ibp_identity(bx, x, &params, &oracle)?;
        worst = worst.max((l - r).abs() / (1.0 + l.abs()));
    }
    let tol = 1e-6;
    Ok(Check::new("ibp_identity", worst <= tol, Some(tol)).with("max_scaled_gap", json!(worst)))
}

/// Five unit-norm σ = π/2 signals at each M, with a 20% margin.
pub fn bracket_check(ms: &[u32]) -> Result<Check> {
    let margin = 0.2;
    let mut c = Check::new("prop4_bracket", true, Some(margin));
    for &m in ms {
        let params = KernelParams::with_defaults(m, DEFAULT_BETA)?;
        let mut rows = Vec::new();
        for seed in 0..5 {
            let rep = prop4_bracket(&random_signal(PI / 2.0, 1, 5, seed), &params, margin)?;
            c.passed &= rep.holds;
            rows.push(json!({"seed": seed, "error": rep.error_l2, "lower": rep.lower, "upper": rep.upper, "holds": rep.holds}));
        }
        c = c.with(&format!("M{m}"), Value::Array(rows));
    }
    Ok(c)
}

fn appendix_checks() -> Result<Vec<Check>> {
    let mut out = vec![mills_check()];
    out.extend(nu_checks(&[8, 12, 16])?);
    out.push(ghat_check()?);
    out.push(ibp_check()?);
    out.push(bracket_check(&[8, 12, 16])?);
    Ok(out)
}

fn quadrature_checks() -> Result<Vec<Check>> {
    let rows = factorial_poly_table(20)?;
    let mut sign = Check::new("factorial_poly_sign", rows.iter().all(|r| r.negative), None);
    let mut bound = Check::new("factorial_poly_bound", rows.iter().all(|r| r.within_bound), None);
    for r in &rows {
        let k = format!("L{:02}", r.order);
        sign = sign.with(&k, json!(r.value));
        bound = bound.with(&k, json!({"ratio": r.ratio_to_factorial, "factor": r.bound_factor}));
    }
    let defect = nc_exactness_defect(20)?;
    let exact = Check::new("newton_cotes_exactness", defect == 0, Some(0.0)).with("defect", json!(defect.to_string()));
    Ok(vec![sign, bound, exact])
}

fn mult_checks() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let t = 7.0;
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (x, y) = (rng.gen_range(0.0..=t), rng.gen_range(0.0..=t));
        worst = worst.max((mult_exact(x, y, t)? - x * y).abs());
    }
    let exact = Check::new("mult_exact", worst <= 1e-9 * t * t, Some(1e-9 * t * t)).with("max_error", json!(worst));
    let pairs: Vec<(f64, f64)> = (0..10_000).map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))).collect();
    let mut zero = true;
    for &(x, _) in pairs.iter().take(1000) {
        for m in [1u32, 5, 20] {
            zero &= mult_approx(0.0, x, 1.0, m)? == 0.0 && mult_approx(x, 0.0, 1.0, m)? == 0.0;
        }
    }
    let zero = Check::new("mult_zero_annihilation", zero, Some(0.0));
    let ms: Vec<u32> = (2..=12).collect();
    let mut errs = Vec::with_capacity(ms.len());
    for &m in &ms {
        let mut e: f64 = 0.0;
        for &(x, y) in &pairs {
            e = e.max((mult_approx(x, y, 1.0, m)? - x * y).abs());
        }
        errs.push(e);
    }
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let factor = log_slope(&xs, &errs).map(f64::exp).unwrap_or(f64::NAN);
    let rate = Check::new("mult_approx_rate", factor <= 0.5, Some(0.5))
        .with("per_unit_factor", json!(factor))
        .with("errors", json!(errs));
    Ok(vec![exact, zero, rate])
}
