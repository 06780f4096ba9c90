use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use sincgnn::analysis::{run_suite, Suite};
use sincgnn::cardinal::{psi_proxy_grid, r_series, r_tilde, shannon_truncated};
use sincgnn::network::{build_gnn_with, eval_gnn, param_count, BuildOptions};
use sincgnn::numeric::{fmt17, log_slope};
use sincgnn::signal::{eval_signal, random_signal, sample_on_lattice};
use sincgnn::{GnnSpec, GridSpec, KernelParams, QuadratureOracle, SignalSpec};

use crate::config::{ExperimentConfig, FileConfig};
use crate::{CliError, ExperimentArgs};

pub const DECAY_HEADER: &str = "M,signal_id,sup_err_plain_shannon,sup_err_r_series,sup_err_r_tilde,sup_err_psi_proxy,\
sup_err_gnn,weight_count,layer_count,wall_time";

fn resolve(exp: &ExperimentArgs) -> Result<ExperimentConfig, CliError> {
    let file = FileConfig::load(exp.config.as_deref())?;
    Ok(ExperimentConfig {
        dim: exp.dim.or(file.dim).unwrap_or(1),
        sigma: exp.sigma.or(file.sigma).unwrap_or(FRAC_PI_2),
        m_list: exp.m_list.clone().or(file.m_list).unwrap_or_else(|| vec![8, 16, 24]),
        beta: exp.beta.or(file.beta).unwrap_or(sincgnn::kernel::DEFAULT_BETA),
        seed: exp.seed.or(file.seed).unwrap_or(0),
        n_signals: exp.signals.or(file.n_signals).unwrap_or(3),
        n_terms: exp.terms.or(file.n_terms).unwrap_or(5),
        quad_mode: exp.quad_mode.or(file.quad_mode).unwrap_or_default().into(),
        out: exp.out.clone().or(file.out),
    })
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::internal(format!("cannot write to stdout: {e}"))),
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))
}

struct DecayRow {
    m: u32,
    signal_id: usize,
    errors: [f64; 5],
    weights: u64,
    layers: u64,
    wall_time: f64,
}

fn sup_over<F>(points: &[Vec<f64>], spec: &SignalSpec, approx: F) -> sincgnn::Result<f64>
where
    F: Fn(usize, &[f64]) -> sincgnn::Result<f64>,
{
    let mut worst: f64 = 0.0;
    for (i, x) in points.iter().enumerate() {
        worst = worst.max((approx(i, x)? - eval_signal(spec, x)).abs());
    }
    Ok(worst)
}

fn decay_row(cfg: &ExperimentConfig, params: &KernelParams, signal_id: usize) -> sincgnn::Result<DecayRow> {
    let start = Instant::now();
    let spec = random_signal(cfg.sigma, cfg.dim, cfg.n_terms, cfg.seed + signal_id as u64);
    let points = GridSpec::prediction(params, cfg.dim).points();
    let plain = if cfg.sigma <= PI {
        sup_over(&points, &spec, |_, x| shannon_truncated(&spec, params.n_half as i64, x))?
    } else {
        f64::NAN
    };
    let series = sup_over(&points, &spec, |_, x| r_series(&spec, params, x))?;
    let tilde = sup_over(&points, &spec, |_, x| r_tilde(&spec, params, x))?;
    let samples = sample_on_lattice(&spec, params.h, params.n_half as i64)?;
    let proxy_values = psi_proxy_grid(&samples, params, &points, &QuadratureOracle::default())?;
    let proxy = sup_over(&points, &spec, |i, _| Ok(proxy_values[i]))?;
    let opts = BuildOptions { quad_mode: cfg.quad_mode, ..BuildOptions::default() };
    let net = build_gnn_with(&spec, params, &opts)?;
    let gnn = sup_over(&points, &spec, |_, x| eval_gnn(&net, x))?;
    let (weights, layers) = param_count(&net);
    Ok(DecayRow {
        m: params.m,
        signal_id,
        errors: [plain, series, tilde, proxy, gnn],
        weights,
        layers,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Rows sorted by (M, signal_id), then a slope row when at least two values
/// of M are present: the least-squares slope of ln(sup_err) against M over
/// all rows of each error column.
pub fn decay_csv(cfg: &ExperimentConfig, no_timing: bool) -> Result<String, CliError> {
    let params = cfg.validate()?;
    let cells: Vec<(&KernelParams, usize)> =
        params.iter().flat_map(|p| (0..cfg.n_signals).map(move |s| (p, s))).collect();
    let mut rows = cells.par_iter().map(|&(p, s)| decay_row(cfg, p, s)).collect::<sincgnn::Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.m, r.signal_id));

    let mut s = String::new();
    s.push_str(DECAY_HEADER);
    s.push('\n');
    for r in &rows {
        let _ = write!(s, "{},{}", r.m, r.signal_id);
        for e in r.errors {
            let _ = write!(s, ",{}", fmt17(e));
        }
        let time = if no_timing { String::new() } else { fmt17(r.wall_time) };
        let _ = writeln!(s, ",{},{},{time}", r.weights, r.layers);
    }
    let mut distinct = cfg.m_list.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() >= 2 && !rows.is_empty() {
        let xs: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
        s.push_str("slope,all");
        for k in 0..5 {
            let ys: Vec<f64> = rows.iter().map(|r| r.errors[k]).collect();
            let slope = log_slope(&xs, &ys).unwrap_or(f64::NAN);
            let _ = write!(s, ",{}", fmt17(slope));
        }
        s.push_str(",,,\n");
    }
    Ok(s)
}

pub fn decay(exp: &ExperimentArgs, no_timing: bool) -> Result<(), CliError> {
    let cfg = resolve(exp)?;
    let csv = decay_csv(&cfg, no_timing)?;
    write_output(cfg.out.as_deref(), &csv)
}

pub fn construct(signal_file: &Path, m: Option<u32>, exp: &ExperimentArgs) -> Result<(), CliError> {
    let spec = SignalSpec::from_json(&read_input(signal_file)?)?;
    let mut cfg = resolve(exp)?;
    let m = match (m, cfg.m_list.as_slice()) {
        (Some(m), _) => m,
        (None, [m]) if exp.m_list.is_some() || exp.config.is_some() => *m,
        _ => return Err(CliError::invalid("construct needs a single M: pass --m")),
    };
    if exp.dim.is_some() && cfg.dim != spec.dim {
        return Err(CliError::invalid(format!("--dim {} does not match the signal's dimension {}", cfg.dim, spec.dim)));
    }
    cfg.dim = spec.dim;
    let params = KernelParams::with_defaults(m, cfg.beta)?;
    let opts = BuildOptions { quad_mode: cfg.quad_mode, ..BuildOptions::default() };
    let net = build_gnn_with(&spec, &params, &opts)?;
    let mut json = net.to_json();
    json.push('\n');
    write_output(cfg.out.as_deref(), &json)
}

/// `prediction`, or `custom:STEP:LO:HI` for the cube [LO, HI]^d within [−1, 1]^d.
pub fn parse_grid(selector: &str, net: &GnnSpec) -> Result<GridSpec, CliError> {
    if selector == "prediction" {
        return Ok(GridSpec::prediction(&net.params, net.dim));
    }
    let parts: Vec<&str> = selector.split(':').collect();
    let bad = || CliError::invalid(format!("bad grid selector {selector:?}: want prediction or custom:STEP:LO:HI"));
    if parts.len() != 4 || parts[0] != "custom" {
        return Err(bad());
    }
    let nums: Vec<f64> = parts[1..].iter().map(|p| p.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let (step, lo, hi) = (nums[0], nums[1], nums[2]);
    if hi >= lo && (lo < -1.0 || hi > 1.0) {
        let value = if lo < -1.0 { lo } else { hi };
        return Err(sincgnn::Error::DomainError { value, lo: -1.0, hi: 1.0 }.into());
    }
    Ok(GridSpec::cube(net.dim, step, lo, hi)?)
}

fn quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}

/// Columns x_1..x_d, value, then f and err = f − value with a signal, then a
/// status column that is `ok` or the reason the point was rejected.
pub fn eval_csv(net: &GnnSpec, grid: &GridSpec, signal: Option<&SignalSpec>) -> (String, usize) {
    let mut s = String::new();
    for k in 1..=net.dim {
        let _ = write!(s, "x_{k},");
    }
    s.push_str(if signal.is_some() { "value,f,err,status\n" } else { "value,status\n" });
    let mut rejected = 0;
    for x in grid.points() {
        for v in &x {
            let _ = write!(s, "{},", fmt17(*v));
        }
        match eval_gnn(net, &x) {
            Ok(v) => {
                let _ = write!(s, "{},", fmt17(v));
                if let Some(spec) = signal {
                    let f = eval_signal(spec, &x);
                    let _ = write!(s, "{},{},", fmt17(f), fmt17(f - v));
                }
                s.push_str("ok\n");
            }
            Err(e) => {
                rejected += 1;
                s.push_str(if signal.is_some() { ",,," } else { "," });
                s.push_str(&quote(&e.to_string()));
                s.push('\n');
            }
        }
    }
    (s, rejected)
}

pub fn eval(spec: &Path, grid: &str, signal_file: Option<&Path>, out: Option<&Path>) -> Result<(), CliError> {
    let net = GnnSpec::from_json(&read_input(spec)?)?;
    let grid = parse_grid(grid, &net)?;
    let signal = match signal_file {
        Some(p) => {
            let s = SignalSpec::from_json(&read_input(p)?)?;
            if s.dim != net.dim {
                return Err(CliError::invalid(format!(
                    "signal dimension {} differs from the network's {}",
                    s.dim, net.dim
                )));
            }
            Some(s)
        }
        None => None,
    };
    let (csv, rejected) = eval_csv(&net, &grid, signal.as_ref());
    if rejected > 0 {
        eprintln!("warning: {rejected} of {} points rejected; see the status column", grid.len());
    }
    write_output(out, &csv)
}

pub fn verify(suite: &str, out: Option<&Path>) -> Result<(), CliError> {
    let suite = Suite::from_str(suite)?;
    let report = run_suite(suite)?;
    let mut json = report.to_json();
    json.push('\n');
    write_output(out, &json)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::internal(format!("suite {} failed: {}", suite.name(), failed.join(", "))))
    }
}
