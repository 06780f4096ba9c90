use rug::Float;

use crate::error::{Error, Result};
use crate::kernel::{reg_sinc, KernelParams};
use crate::numeric::{box_indices, CompensatedSum};
use crate::quadrature::{conv_at, grid_index, max_steps, ConvTable, QuadratureOracle};
use crate::signal::{check_band, eval_signal, sample_on_lattice, sinc, LatticeSamples, SignalSpec};

/// Σ_n f(n⃗)·w_1[n_1]⋯w_d[n_d] over n⃗ ∈ [−N, N]^d, in ascending index order.
pub(crate) fn tensor_sum(samples: &LatticeSamples, factors: &[Vec<f64>]) -> f64 {
    let mut acc = CompensatedSum::new();
    let nh = samples.n_half;
    for (i, v) in samples.values.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let n = samples.index(i);
        let w: f64 = n.iter().zip(factors).map(|(&nk, f)| f[(nk + nh) as usize]).product();
        acc.add(v * w);
    }
    acc.value()
}

/// Plain truncated cardinal series on the unit lattice.
pub fn shannon_truncated(spec: &SignalSpec, n_half: i64, x: &[f64]) -> Result<f64> {
    if spec.sigma > std::f64::consts::PI {
        return Err(Error::BandTooWide { sigma: spec.sigma, limit: std::f64::consts::PI });
    }
    let samples = unit_samples(spec, n_half);
    let factors: Vec<Vec<f64>> =
        x.iter().map(|&xk| (-n_half..=n_half).map(|n| sinc(xk - n as f64)).collect()).collect();
    Ok(tensor_sum(&samples, &factors))
}

// σ = π sits exactly on the Nyquist limit, which sample_on_lattice rejects
fn unit_samples(spec: &SignalSpec, n_half: i64) -> LatticeSamples {
    let side = (2 * n_half + 1) as usize;
    let mut out =
        LatticeSamples { dim: spec.dim, h: 1.0, n_half, values: Vec::with_capacity(side.pow(spec.dim as u32)) };
    for i in 0..side.pow(spec.dim as u32) {
        let n: Vec<f64> = out.index(i).iter().map(|&v| v as f64).collect();
        out.values.push(eval_signal(spec, &n));
    }
    out
}

/// Inclusive index range, per coordinate, of lattice nodes n with
/// |x/h − n| < M, the only ones the regularized series can see.
pub fn r_series_support(params: &KernelParams, x: &[f64]) -> Vec<(i64, i64)> {
    let m = params.m as f64;
    x.iter()
        .map(|&xk| {
            let u = xk / params.h;
            ((u - m).floor() as i64 + 1, (u + m).ceil() as i64 - 1)
        })
        .collect()
}

/// Full regularized series Σ_{n ∈ Z^d} f(hn)·∏ sinc·G(x_k/h − n_k), summed over
/// the truncation window only.
pub fn r_series(spec: &SignalSpec, params: &KernelParams, x: &[f64]) -> Result<f64> {
    check_band(spec.sigma, params.h)?;
    let support = r_series_support(params, x);
    let lo: Vec<i64> = support.iter().map(|s| s.0).collect();
    let hi: Vec<i64> = support.iter().map(|s| s.1).collect();
    let factors: Vec<Vec<f64>> = x
        .iter()
        .zip(&support)
        .map(|(&xk, &(a, b))| (a..=b).map(|n| reg_sinc(xk / params.h - n as f64, params)).collect())
        .collect();
    let mut acc = CompensatedSum::new();
    let mut y = vec![0.0; x.len()];
    for n in box_indices(&lo, &hi) {
        let mut w = 1.0;
        for k in 0..x.len() {
            y[k] = params.h * n[k] as f64;
            w *= factors[k][(n[k] - lo[k]) as usize];
        }
        if w != 0.0 {
            acc.add(eval_signal(spec, &y) * w);
        }
    }
    Ok(acc.value())
}

/// The regularized series restricted to n⃗ ∈ [−N, N]^d.
pub fn r_tilde(spec: &SignalSpec, params: &KernelParams, x: &[f64]) -> Result<f64> {
    let samples = sample_on_lattice(spec, params.h, params.n_half as i64)?;
    Ok(r_tilde_samples(&samples, params, x))
}

pub fn r_tilde_samples(samples: &LatticeSamples, params: &KernelParams, x: &[f64]) -> f64 {
    let nh = samples.n_half;
    let factors: Vec<Vec<f64>> =
        x.iter().map(|&xk| (-nh..=nh).map(|n| reg_sinc(xk / params.h - n as f64, params)).collect()).collect();
    tensor_sum(samples, &factors)
}

/// Continuous proxy network Σ f(hn⃗)·∏ [ramp_{hn_k} ∗ K''](x_k) with every
/// convolution from the reference integrator.
pub fn psi_proxy(spec: &SignalSpec, params: &KernelParams, x: &[f64], oracle: &QuadratureOracle) -> Result<f64> {
    let samples = sample_on_lattice(spec, params.h, params.n_half as i64)?;
    psi_proxy_samples(&samples, params, x, oracle)
}

pub fn psi_proxy_samples(
    samples: &LatticeSamples,
    params: &KernelParams,
    x: &[f64],
    oracle: &QuadratureOracle,
) -> Result<f64> {
    let nh = samples.n_half;
    let mut factors = Vec::with_capacity(x.len());
    for &xk in x {
        let mut f = Vec::with_capacity(samples.side());
        for n in -nh..=nh {
            f.push(conv_at(xk - params.h * n as f64, params, oracle)?);
        }
        factors.push(f);
    }
    Ok(tensor_sum(samples, &factors))
}

/// [`psi_proxy_samples`] at many τ-grid points; each distinct grid length is
/// integrated once.
pub fn psi_proxy_grid(
    samples: &LatticeSamples,
    params: &KernelParams,
    points: &[Vec<f64>],
    oracle: &QuadratureOracle,
) -> Result<Vec<f64>> {
    let l_hi = max_steps(params);
    let mut cache: Vec<Option<f64>> = vec![None; l_hi + 1];
    let s = params.support_steps();
    let k = params.stride();
    let tau = params.tau();
    let nh = samples.n_half;
    let mut out = Vec::with_capacity(points.len());
    for x in points {
        let mut factors = Vec::with_capacity(x.len());
        for &xk in x {
            let m = grid_index(xk, params)?;
            let mut f = Vec::with_capacity(samples.side());
            for n in -nh..=nh {
                let l = m + s - k * n;
                let v = if l <= 0 {
                    0.0
                } else if (l as usize) <= l_hi {
                    match cache[l as usize] {
                        Some(v) => v,
                        None => {
                            let v = conv_at(-params.support() + l as f64 * tau, params, oracle)?;
                            cache[l as usize] = Some(v);
                            v
                        }
                    }
                } else {
                    conv_at(xk - params.h * n as f64, params, oracle)?
                };
                f.push(v);
            }
            factors.push(f);
        }
        out.push(tensor_sum(samples, &factors));
    }
    Ok(out)
}

/// Multiprecision proxy at the τ-grid point m⃗τ from a reference table.
pub fn psi_proxy_hp(samples: &LatticeSamples, params: &KernelParams, m: &[i64], table: &ConvTable) -> Result<Float> {
    let prec = table.prec;
    let nh = samples.n_half;
    let s = params.support_steps();
    let k = params.stride();
    let mut factors: Vec<Vec<Float>> = Vec::with_capacity(m.len());
    for &mk in m {
        let mut f = Vec::with_capacity(samples.side());
        for n in -nh..=nh {
            let l = mk + s - k * n;
            if l <= 0 {
                f.push(Float::new(prec));
            } else if (l as usize) < table.values.len() {
                f.push(table.values[l as usize].clone());
            } else {
                return Err(Error::DomainError { value: l as f64, lo: 0.0, hi: (table.values.len() - 1) as f64 });
            }
        }
        factors.push(f);
    }
    let mut acc = Float::new(prec + 32);
    for (i, v) in samples.values.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let n = samples.index(i);
        let mut w = Float::with_val(prec + 32, *v);
        for (nk, f) in n.iter().zip(&factors) {
            w *= &f[(nk + nh) as usize];
        }
        acc += w;
    }
    Ok(Float::with_val(prec, acc))
}
