//! Acceptance run: one PASS/FAIL line per criterion, with the measured values,
//! the pinned tolerance and the runtime budget. Exits nonzero if any fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer, Rational};

use sincgnn::analysis::{
    factorial_poly_table, ghat_nonneg, ibp_identity, mills_bounds, prop4_bracket, proxy_residual, NuProfile,
};
use sincgnn::cardinal::{psi_proxy_hp, r_tilde, shannon_truncated};
use sincgnn::kernel::DEFAULT_BETA;
use sincgnn::network::{
    as_graph_filter, build_gnn, build_gnn_from_samples, eval_gnn, eval_gnn_hp, mult_approx, mult_exact, BuildOptions,
};
use sincgnn::numeric::log_slope;
use sincgnn::quadrature::{conv_table, exact_weights, filter_table, max_steps, QuadMode};
use sincgnn::signal::{eval_signal, l2_norm, lattice_energy, random_signal, sample_on_lattice, Term};
use sincgnn::{GnnSpec, GridSpec, KernelParams, QuadratureOracle, SignalSpec};

type Outcome = sincgnn::Result<(bool, String)>;
type Criterion = (&'static str, f64, fn() -> Outcome);

fn params(m: u32, beta: f64) -> KernelParams {
    KernelParams::with_defaults(m, beta).expect("valid kernel parameters")
}

fn sup_gnn_error(net: &GnnSpec, spec: &SignalSpec) -> sincgnn::Result<f64> {
    let mut worst: f64 = 0.0;
    for x in GridSpec::prediction(&net.params, net.dim).points() {
        worst = worst.max((eval_gnn(net, &x)? - eval_signal(spec, &x)).abs());
    }
    Ok(worst)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn decay(dim: usize, beta: f64, ms: &[u32], seeds: std::ops::Range<u64>, terms: usize, max_slope: f64) -> Outcome {
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let mut ok = true;
    let mut lines = Vec::new();
    for seed in seeds {
        let spec = random_signal(FRAC_PI_2, dim, terms, seed);
        let mut errs = Vec::with_capacity(ms.len());
        for &m in ms {
            errs.push(sup_gnn_error(&build_gnn(&spec, &params(m, beta))?, &spec)?);
        }
        let slope = log_slope(&xs, &errs).unwrap_or(f64::NAN);
        let good = strictly_decreasing(&errs) && slope <= max_slope;
        ok &= good;
        lines.push(format!("seed {seed}: sup_err {} slope {slope:.4}", fmt_list(&errs)));
    }
    Ok((ok, format!("slope <= {max_slope}; {}", lines.join("; "))))
}

fn c1_decay_1d() -> Outcome {
    decay(1, DEFAULT_BETA, &[8, 16, 24, 32], 0..5, 5, -0.05)
}

fn c2_regularization() -> Outcome {
    let p = params(16, DEFAULT_BETA);
    let n_half = p.n_half as i64;
    let mut ok = true;
    let mut lines = Vec::new();
    for seed in 0..5 {
        let spec = random_signal(FRAC_PI_2, 1, 5, seed);
        let (mut reg, mut plain): (f64, f64) = (0.0, 0.0);
        for x in GridSpec::prediction(&p, 1).points() {
            let f = eval_signal(&spec, &x);
            reg = reg.max((r_tilde(&spec, &p, &x)? - f).abs());
            plain = plain.max((shannon_truncated(&spec, n_half, &x)? - f).abs());
        }
        let ratio = reg / plain;
        ok &= ratio <= 0.1;
        lines.push(format!("seed {seed}: r_tilde {reg:.3e} plain {plain:.3e} ratio {ratio:.3}"));
    }
    Ok((ok, format!("ratio <= 0.1 with {} samples each; {}", 2 * n_half + 1, lines.join("; "))))
}

fn c3_discretization() -> Outcome {
    let ms = [8u32, 12, 16];
    let mut ok = true;
    let mut lines = Vec::new();
    for seed in 0..5 {
        let spec = random_signal(FRAC_PI_2, 1, 5, seed);
        let mut gaps = Vec::new();
        let mut f64_gap: f64 = 0.0;
        for &m in &ms {
            let p = params(m, DEFAULT_BETA);
            let opts = BuildOptions { quad_mode: QuadMode::SinglePanelRational, ..BuildOptions::default() };
            let net = sincgnn::network::build_gnn_with(&spec, &p, &opts)?;
            let prec = filter_table(&p, opts.quad_mode)?.prec;
            let table = conv_table(&p, max_steps(&p), prec)?;
            let samples = net.samples();
            let mut worst = Float::new(prec);
            for i in -p.l_s()..=p.l_s() {
                let a = eval_gnn_hp(&net, i)?;
                let b = psi_proxy_hp(&samples, &p, &[i], &table)?;
                let d = Float::with_val(prec, &a - &b).abs();
                if d > worst {
                    worst = d;
                }
                if m == 8 {
                    let x = [i as f64 * p.tau()];
                    f64_gap = f64_gap.max((eval_gnn(&net, &x)? - b.to_f64()).abs());
                }
            }
            gaps.push(worst.to_f64());
        }
        let c = gaps[0] * 2f64.powi(ms[0] as i32);
        let good = ms.iter().zip(&gaps).skip(1).all(|(&m, &g)| g <= c * 2f64.powi(-(m as i32)));
        ok &= good;
        lines.push(format!("seed {seed}: gap {} C {c:.3e} (f64 gap at M=8 {f64_gap:.1e})", fmt_list(&gaps)));
    }
    Ok((ok, format!("gap <= C*2^-M, C from M=8; {}", lines.join("; "))))
}

fn c4_proxy_residual() -> Outcome {
    let oracle = QuadratureOracle::default();
    let scale = |m: u32| (m as f64).powf(1.5) * (-(m as f64) / 2.0).exp();
    let ms = [8u32, 12, 16, 20];
    let mut ok = true;
    let mut lines = Vec::new();
    for seed in 0..5 {
        let spec = random_signal(FRAC_PI_2, 1, 5, seed);
        let norm = l2_norm(&spec);
        let mut res = Vec::new();
        for &m in &ms {
            res.push(proxy_residual(&spec, &params(m, DEFAULT_BETA), &oracle)?);
        }
        let c = res[0] / (scale(ms[0]) * norm);
        let good = ms.iter().zip(&res).skip(1).all(|(&m, &r)| r <= c * scale(m) * norm);
        ok &= good;
        lines.push(format!("seed {seed}: residual {} C {c:.3e}", fmt_list(&res)));
    }
    Ok((ok, format!("residual <= C*M^1.5*exp(-M/2)*|f|, C from M=8; {}", lines.join("; "))))
}

fn c5_decay_2d() -> Outcome {
    let p = params(4, 0.125);
    let net = build_gnn(&random_signal(FRAC_PI_2, 2, 3, 0), &p)?;
    let comp = GridSpec::computation(&p, 2).len();
    let pred = GridSpec::prediction(&p, 2).len();
    let samples = net.sample_weights.len();
    let grids = comp == 65 * 65 && pred == 17 * 17 && samples == 25;
    let (ok, detail) = decay(2, 0.125, &[4, 8, 12], 0..3, 3, -0.1)?;
    Ok((ok && grids, format!("grids {comp}/{pred}/{samples} (want 4225/289/25); {detail}")))
}

fn c6_lattice_energy() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let spec = random_signal(PI, 1, 5, seed);
        let n = l2_norm(&spec);
        worst = worst.max((lattice_energy(&spec) - n * n).abs());
    }
    Ok((worst <= 1e-10, format!("max |sum f(n)^2 - |f|^2| {worst:.3e} <= 1e-10")))
}

fn c7_factorial_table() -> Outcome {
    let rows = factorial_poly_table(20)?;
    let mut ok = rows.len() == 20;
    let mut worst_odd: f64 = 0.0;
    let mut worst_even: f64 = 0.0;
    for row in &rows {
        let (num, den) = row.value.split_once('/').expect("rational rendering");
        let v = Rational::from((num.parse::<Integer>().unwrap(), den.parse::<Integer>().unwrap()));
        let fact = Rational::from(Integer::from(Integer::factorial(row.order as u32)));
        let factor = if row.order % 2 == 1 { 1 } else { 5 };
        let ratio = v.clone().abs() / &fact;
        ok &= v < 0 && ratio <= factor;
        if factor == 1 {
            worst_odd = worst_odd.max(ratio.to_f64());
        } else {
            worst_even = worst_even.max(ratio.to_f64());
        }
    }
    Ok((ok, format!("L=1..20 negative; max |odd|/L! {worst_odd:.4} <= 1, max |even|/L! {worst_even:.4} <= 5")))
}

fn c8_mult() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    let t = 7.0;
    let mut exact_err: f64 = 0.0;
    for _ in 0..10_000 {
        let (x, y) = (rng.gen_range(0.0..=t), rng.gen_range(0.0..=t));
        exact_err = exact_err.max((mult_exact(x, y, t)? - x * y).abs());
    }
    let pairs: Vec<(f64, f64)> = (0..10_000).map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))).collect();
    let mut zero = true;
    for &(x, _) in &pairs {
        for m in [1u32, 4, 12, 30] {
            zero &= mult_approx(0.0, x, 1.0, m)? == 0.0 && mult_approx(x, 0.0, 1.0, m)? == 0.0;
        }
    }
    let ms: Vec<u32> = (2..=12).collect();
    let mut errs = Vec::new();
    for &m in &ms {
        let mut e: f64 = 0.0;
        for &(x, y) in &pairs {
            e = e.max((mult_approx(x, y, 1.0, m)? - x * y).abs());
        }
        errs.push(e);
    }
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let factor = log_slope(&xs, &errs).map(f64::exp).unwrap_or(f64::NAN);
    let ok = exact_err <= 1e-9 && zero && factor <= 0.5;
    Ok((ok, format!("exact err {exact_err:.2e} <= 1e-9; zero annihilation {zero}; per-unit factor {factor:.4} <= 0.5")))
}

fn c9_appendix() -> Outcome {
    let mut parts = Vec::new();

    let mut mills = true;
    for i in 1..=100 {
        let x = 10f64.powf(-2.0 + 3.0 * i as f64 / 100.0);
        let (l, t, u) = mills_bounds(x);
        mills &= l < t && t < u;
    }
    parts.push(("mills", mills, "strict at 100 points".to_string()));

    let mut extrema = true;
    let mut nu_detail = Vec::new();
    for m in [8u32, 12, 16] {
        let prof = NuProfile::new(FRAC_PI_2, &params(m, DEFAULT_BETA), 101)?;
        let good = prof.extrema_at_endpoints() && prof.derivative_sign_changes() <= 1;
        extrema &= good;
        nu_detail.push(format!("M={m} changes {}", prof.derivative_sign_changes()));
    }
    parts.push(("nu_tr extrema", extrema, nu_detail.join(" ")));

    let gp = KernelParams::new(4, 2.0, 1.0, 2, DEFAULT_BETA)?;
    let grid: Vec<f64> = (0..501).map(|i| 0.1 * i as f64).collect();
    let g = ghat_nonneg(&gp, &grid)?;
    parts.push(("ghat", g.min >= -1e-9, format!("min {:.3e} at w={} >= -1e-9", g.min, g.argmin)));

    let p8 = params(8, DEFAULT_BETA);
    let oracle = QuadratureOracle::default();
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    let mut ibp: f64 = 0.0;
    for _ in 0..100 {
        let (bx, x) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
        let (l, r) = ibp_identity(bx, x, &p8, &oracle)?;
        ibp = ibp.max((l - r).abs() / (1.0 + l.abs()));
    }
    parts.push(("ibp", ibp <= 1e-6, format!("gap {ibp:.2e} <= 1e-6")));

    let mut bracket = true;
    let mut fails = Vec::new();
    for m in [8u32, 12, 16] {
        for seed in 0..5 {
            let rep = prop4_bracket(&random_signal(FRAC_PI_2, 1, 5, seed), &params(m, DEFAULT_BETA), 0.2)?;
            if !rep.holds {
                fails.push(format!("M={m}/seed {seed} err/lower {:.3}", rep.error_l2 / rep.lower));
            }
            bracket &= rep.holds;
        }
    }
    parts.push(("L2 bracket (20%)", bracket, if fails.is_empty() { "all hold".into() } else { fails.join(", ") }));

    let ok = parts.iter().all(|p| p.1);
    let detail: Vec<String> =
        parts.iter().map(|(n, pass, d)| format!("{n} {}: {d}", if *pass { "ok" } else { "FAIL" })).collect();
    Ok((ok, detail.join("; ")))
}

fn c10_newton_cotes() -> Outcome {
    let mut ok = true;
    for order in 1..=20usize {
        let w = exact_weights(order)?;
        for k in 0..=order as u32 {
            let mut s = Rational::new();
            for (l, a) in w.iter().enumerate() {
                s += Rational::from(a * Integer::from(Integer::u_pow_u(l as u32, k)));
            }
            let truth = Rational::from((Integer::from(Integer::u_pow_u(order as u32, k + 1)), Integer::from(k + 1)));
            ok &= s == truth;
        }
    }
    let trap = exact_weights(1)?;
    let simpson = exact_weights(2)?;
    let r = |n: i32, d: i32| Rational::from((n, d));
    let closed = trap.as_slice() == [r(1, 2), r(1, 2)] && simpson.as_slice() == [r(1, 3), r(4, 3), r(1, 3)];
    Ok((ok && closed, format!("moments k<=L exact for L<=20: {ok}; trapezoid and Simpson weights: {closed}")))
}

fn c11_structure() -> Outcome {
    let p1 = params(8, DEFAULT_BETA);
    let spec1 = random_signal(FRAC_PI_2, 1, 5, 3);
    let net1 = build_gnn(&spec1, &p1)?;
    let g1 = as_graph_filter(&net1);
    let mut exact = true;
    for m in g1.prediction_nodes() {
        let x = [m[0] as f64 * p1.tau()];
        exact &= g1.aggregate(&m)?.to_bits() == eval_gnn(&net1, &x)?.to_bits();
    }

    let p2 = params(4, 0.125);
    let net2 = build_gnn(&random_signal(FRAC_PI_2, 2, 3, 3), &p2)?;
    let g2 = as_graph_filter(&net2);
    let tol = net2.mult_tolerance();
    let mut gap2: f64 = 0.0;
    for m in g2.prediction_nodes() {
        let x: Vec<f64> = m.iter().map(|&v| v as f64 * p2.tau()).collect();
        gap2 = gap2.max((g2.aggregate(&m)? - eval_gnn(&net2, &x)?).abs());
    }

    let mut round_trip = true;
    for net in [&net1, &net2] {
        let back = GnnSpec::from_json(&net.to_json())?;
        round_trip &= back == *net;
        for x in GridSpec::prediction(&net.params, net.dim).points() {
            round_trip &= eval_gnn(&back, &x)?.to_bits() == eval_gnn(net, &x)?.to_bits();
        }
    }

    let a = SignalSpec::new(1.0, 1, vec![Term { shift: vec![1], coeff: 0.7 }])?;
    let b = SignalSpec::new(
        1.0,
        1,
        vec![
            Term { shift: vec![1], coeff: 0.35 },
            Term { shift: vec![-3], coeff: 0.0 },
            Term { shift: vec![1], coeff: 0.35 },
        ],
    )?;
    let na = build_gnn(&a, &p1)?;
    let nb = build_gnn(&b, &p1)?;
    let samples = sample_on_lattice(&a, p1.h, p1.n_half as i64)?;
    let nc = build_gnn_from_samples(&samples, &p1, &BuildOptions::default(), None)?;
    let same = na == nb && na.to_json() == nb.to_json() && na == nc;

    let ok = exact && gap2 <= tol && round_trip && same;
    Ok((
        ok,
        format!(
            "d=1 bit-exact {exact}; d=2 gap {gap2:.2e} <= {tol:.2e}; JSON round trip {round_trip}; sample-only {same}"
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("exponential decay d=1", 60.0, c1_decay_1d),
        ("regularization beats truncation", 10.0, c2_regularization),
        ("discretization fidelity", 30.0, c3_discretization),
        ("space-side residual", 30.0, c4_proxy_residual),
        ("decay d=2 and worked grids", 300.0, c5_decay_2d),
        ("lattice energy identity", 1.0, c6_lattice_energy),
        ("factorial polynomial table", 5.0, c7_factorial_table),
        ("multiplication networks", 10.0, c8_mult),
        ("appendix suite", 60.0, c9_appendix),
        ("Newton-Cotes exactness", 1.0, c10_newton_cotes),
        ("structural identities", 10.0, c11_structure),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok((ok, d)) => (ok && secs <= *budget, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name} [{secs:.2} s / {budget} s]: {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
