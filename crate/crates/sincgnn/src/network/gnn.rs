//! The constructed network: weights from lattice samples, 𝔊 filter values and
//! multiplication sub-networks.
//!
//! Counting convention used by [`param_count`]:
//! - weights: one per sample weight, one bias h·n per coordinate and lattice
//!   index, one kernel value per computation-grid node and coordinate, and for
//!   d ≥ 2 the weights of every approximate product plus the ‖f‖ and ‖f‖⁻¹
//!   scalings of each first-coordinate branch;
//! - layers: one for the ReLU_{hn} features, one per grid hop of the filter
//!   support (the kernel is realized by 1-hop aggregations), the ReLU depth of
//!   the multiplication chains, and one output layer.

use rug::Float;
use serde::{Deserialize, Serialize};

use super::mult::{chain_error_bound, mult_approx, mult_flat, mult_layer_count, mult_weight_count};
use crate::cardinal::tensor_sum;
use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::numeric::{box_indices, CompensatedSum};
use crate::quadrature::{filter_table, grid_index, max_steps, panel_steps, QuadMode};
use crate::signal::{l2_norm, sample_on_lattice, LatticeSamples, SignalSpec};

/// Constant bounding every |𝔊(n, x)| by 𝒞·M^{5/2}.
pub const FILTER_BOUND: f64 = 400.0;

/// How ‖f‖₂ in the first-coordinate rescaling is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormSource {
    /// Closed form from the signal's coefficients.
    #[default]
    ClosedForm,
    /// h^d Σ f(h·n)² over the sampling lattice.
    Samples,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BuildOptions {
    pub quad_mode: QuadMode,
    /// Overrides [`default_mult_depth`].
    pub mult_depth: Option<u32>,
    pub norm: NormSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleWeight {
    pub n: Vec<i64>,
    pub value: f64,
}

/// 𝔊 tabulated by grid step count L(n, x) = m + S − k·n, with the
/// bookkeeping that maps (n, x = mτ) to L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadTables {
    pub mode: QuadMode,
    pub panel_cap: usize,
    pub precision_bits: u32,
    pub support_steps: i64,
    pub stride: i64,
    /// 𝔊_L for L = 0..=max_steps; 𝔊_0 = 0.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnnSpec {
    pub params: KernelParams,
    pub dim: usize,
    /// f(h·n⃗) in row-major order, last coordinate fastest.
    pub sample_weights: Vec<SampleWeight>,
    /// MLP biases h·n for n = −N..=N, shared by all coordinates.
    pub bias_offsets: Vec<f64>,
    pub quad_tables: QuadTables,
    /// ‖f‖₂ for the rescaling in d ≥ 2; absent in d = 1.
    pub norm: Option<f64>,
    pub norm_source: NormSource,
    pub mult_depth: u32,
    pub t1: f64,
    pub t2: f64,
    pub weight_count: u64,
    pub layer_count: u64,
}

/// Domain of the products of filter values.
pub fn t1_bound(m: u32) -> f64 {
    FILTER_BOUND * (m as f64).powf(2.5)
}

/// Domain of the final product per first-coordinate index.
pub fn t2_bound(m: u32, dim: usize) -> f64 {
    2.0 * FILTER_BOUND.powi(dim as i32) * (m as f64).powi(3 * (dim as i32 - 1))
}

/// 2M plus enough extra teeth to cancel the T² growth of the product error:
/// 2M + ⌈log₂(2·T₂)⌉ for d ≥ 2, 2M for d = 1 (which has no products).
pub fn default_mult_depth(m: u32, dim: usize) -> u32 {
    if dim < 2 {
        return 2 * m;
    }
    2 * m + (2.0 * t2_bound(m, dim)).log2().ceil() as u32
}

pub fn build_gnn(spec: &SignalSpec, params: &KernelParams) -> Result<GnnSpec> {
    build_gnn_with(spec, params, &BuildOptions::default())
}

pub fn build_gnn_with(spec: &SignalSpec, params: &KernelParams, opts: &BuildOptions) -> Result<GnnSpec> {
    spec.validate()?;
    params.validate()?;
    let samples = sample_on_lattice(spec, params.h, params.n_half as i64)?;
    let norm = match opts.norm {
        NormSource::ClosedForm => Some(l2_norm(spec)),
        NormSource::Samples => None,
    };
    build_gnn_from_samples(&samples, params, opts, norm)
}

/// Builds from lattice samples alone. `norm` is required in d ≥ 2 with
/// [`NormSource::ClosedForm`] and ignored otherwise.
pub fn build_gnn_from_samples(
    samples: &LatticeSamples,
    params: &KernelParams,
    opts: &BuildOptions,
    norm: Option<f64>,
) -> Result<GnnSpec> {
    params.validate()?;
    let d = samples.dim;
    if d == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    if samples.h != params.h || samples.n_half != params.n_half as i64 {
        return Err(Error::Config(format!(
            "samples on step {} with N = {} do not match h = {}, N = {}",
            samples.h, samples.n_half, params.h, params.n_half
        )));
    }
    if samples.len() != samples.side().pow(d as u32) {
        return Err(Error::Config("sample count does not fill the lattice".into()));
    }
    let norm = if d == 1 {
        None
    } else {
        Some(match opts.norm {
            NormSource::Samples => sample_norm(samples),
            NormSource::ClosedForm => norm.ok_or_else(|| {
                Error::Config("closed-form norm needs the signal; pass it or use sample norms".into())
            })?,
        })
    };
    let mode = opts.quad_mode;
    let table = filter_table(params, mode)?;
    let nh = params.n_half as i64;
    let mut net = GnnSpec {
        params: *params,
        dim: d,
        sample_weights: (0..samples.len())
            .map(|i| SampleWeight { n: samples.index(i), value: samples.values[i] })
            .collect(),
        bias_offsets: (-nh..=nh).map(|n| params.h * n as f64).collect(),
        quad_tables: QuadTables {
            mode,
            panel_cap: mode.panel_cap(params),
            precision_bits: table.prec,
            support_steps: params.support_steps(),
            stride: params.stride(),
            values: table.values.clone(),
        },
        norm,
        norm_source: opts.norm,
        mult_depth: opts.mult_depth.unwrap_or_else(|| default_mult_depth(params.m, d)),
        t1: t1_bound(params.m),
        t2: t2_bound(params.m, d),
        weight_count: 0,
        layer_count: 0,
    };
    if net.mult_depth == 0 {
        return Err(Error::Config("multiplication depth must be at least 1".into()));
    }
    let (w, l) = param_count(&net);
    net.weight_count = w;
    net.layer_count = l;
    Ok(net)
}

/// Sampled estimate sqrt(h^d Σ f(h·n)²).
pub fn sample_norm(samples: &LatticeSamples) -> f64 {
    let s: f64 = samples.values.iter().map(|v| v * v).sum();
    (samples.h.powi(samples.dim as i32) * s).sqrt()
}

/// (weights, layers) under the convention in the module docs.
pub fn param_count(net: &GnnSpec) -> (u64, u64) {
    let p = &net.params;
    let d = net.dim as u32;
    let side = 2 * p.n_half as u64 + 1;
    let comp_nodes = 2 * p.support_steps() as u64 + 1;
    let mut weights = side.pow(d) + d as u64 * side + d as u64 * comp_nodes;
    let mut layers = 1 + p.support_steps() as u64 + 1;
    if d >= 2 {
        let m = net.mult_depth;
        let products = side.pow(d - 1) * (d as u64 - 2) + side;
        weights += products * mult_weight_count(m) + 2 * side;
        layers += (d as u64 - 1) * mult_layer_count(m);
    }
    (weights, layers)
}

impl GnnSpec {
    pub fn samples(&self) -> LatticeSamples {
        LatticeSamples {
            dim: self.dim,
            h: self.params.h,
            n_half: self.params.n_half as i64,
            values: self.sample_weights.iter().map(|s| s.value).collect(),
        }
    }

    /// Checks the internal consistency of a deserialized spec.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        let s = self.samples();
        if s.len() != s.side().pow(self.dim as u32) {
            return Err(Error::Config(format!(
                "expected {} sample weights, found {}",
                s.side().pow(self.dim as u32),
                s.len()
            )));
        }
        for (i, w) in self.sample_weights.iter().enumerate() {
            if w.n != s.index(i) {
                return Err(Error::Config(format!("sample weight {i} has index {:?}, expected {:?}", w.n, s.index(i))));
            }
        }
        if self.quad_tables.values.len() != max_steps(&self.params) + 1 {
            return Err(Error::Config("quadrature table length does not match the parameters".into()));
        }
        if self.dim >= 2 && self.norm.is_none() {
            return Err(Error::Config("d ≥ 2 needs a norm".into()));
        }
        if self.mult_depth == 0 {
            return Err(Error::Config("multiplication depth must be at least 1".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("GnnSpec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: GnnSpec =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid network JSON: {e}")))?;
        net.validate()?;
        Ok(net)
    }

    /// Grid indices m⃗ with x⃗ = m⃗τ, checked against the prediction range.
    pub fn prediction_index(&self, x: &[f64]) -> Result<Vec<i64>> {
        if x.len() != self.dim {
            return Err(Error::Config(format!("point has {} coordinates, network has {}", x.len(), self.dim)));
        }
        let ls = self.params.l_s();
        x.iter()
            .map(|&xk| {
                let m = grid_index(xk, &self.params)?;
                if m.abs() > ls {
                    return Err(Error::DomainError { value: xk, lo: -1.0, hi: 1.0 });
                }
                Ok(m)
            })
            .collect()
    }

    fn filter(&self, l: i64) -> f64 {
        if l <= 0 {
            0.0
        } else {
            self.quad_tables.values[l as usize]
        }
    }

    /// 𝔊(n, ·) at grid index m, for every n = −N..=N.
    pub(crate) fn filter_row(&self, m: i64) -> Vec<f64> {
        let nh = self.params.n_half as i64;
        (-nh..=nh).map(|n| self.filter(panel_steps(n, m, &self.params))).collect()
    }

    /// A priori bound on |eval_gnn − eval_exact_products|, from the product
    /// error bounds of the Y₁ chains and the Y₃ products; 0 in d = 1.
    pub fn mult_tolerance(&self) -> f64 {
        if self.dim < 2 {
            return 0.0;
        }
        let m = self.mult_depth;
        let norm = self.norm.unwrap_or(0.0);
        let side = (2 * self.params.n_half + 1) as f64;
        let abs_sum: f64 = self.sample_weights.iter().map(|w| w.value.abs()).sum();
        let y1 = if self.dim > 2 { chain_error_bound(self.dim - 1, self.t1, m) } else { 0.0 };
        side * norm * 1.5 * self.t2 * self.t2 * 2f64.powi(-2 * m as i32) + self.t1 * abs_sum * y1
    }

    /// Σ f(h·n⃗) ∏ 𝔊(n_k, x_k) with exact products.
    pub fn eval_exact_products(&self, x: &[f64]) -> Result<f64> {
        let m = self.prediction_index(x)?;
        let factors: Vec<Vec<f64>> = m.iter().map(|&mk| self.filter_row(mk)).collect();
        Ok(tensor_sum(&self.samples(), &factors))
    }
}

/// Evaluates the network at a prediction-grid point.
///
/// d = 1 is the linear aggregation Σ f(hn)·𝔊(n, x). For d ≥ 2, per
/// first-coordinate index n₁: Y₁ is the product chain of 𝔊(n_k, x_k) over
/// k ≥ 2 (identity for d = 2), Y₂ = Σ f·Y₁ over n₂..n_d, Y₃ the approximate
/// product of Y₂/‖f‖ with 𝔊(n₁, x₁), and the output is Σ ‖f‖·Y₃.
pub fn eval_gnn(net: &GnnSpec, x: &[f64]) -> Result<f64> {
    let m = net.prediction_index(x)?;
    let rows: Vec<Vec<f64>> = m.iter().map(|&mk| net.filter_row(mk)).collect();
    if net.dim == 1 {
        return Ok(tensor_sum(&net.samples(), &rows));
    }
    let norm = net.norm.ok_or_else(|| Error::Config("d ≥ 2 needs a norm".into()))?;
    if norm == 0.0 {
        return Ok(0.0);
    }
    let nh = net.params.n_half as i64;
    let side = (2 * nh + 1) as usize;
    let d = net.dim;
    let depth = net.mult_depth;
    // Y₁ does not depend on n₁
    let tail = box_indices(&vec![-nh; d - 1], &vec![nh; d - 1]);
    let mut y1 = Vec::with_capacity(tail.len());
    let mut args = Vec::with_capacity(d - 1);
    for t in &tail {
        args.clear();
        args.extend(t.iter().zip(&rows[1..]).map(|(&nk, r)| r[(nk + nh) as usize]));
        y1.push(mult_flat(&args, net.t1, depth)?);
    }
    let mut out = CompensatedSum::new();
    for (i1, g1) in rows[0].iter().enumerate() {
        let block = &net.sample_weights[i1 * tail.len()..(i1 + 1) * tail.len()];
        let mut y2 = CompensatedSum::new();
        for (w, y) in block.iter().zip(&y1) {
            if w.value != 0.0 {
                y2.add(w.value * y);
            }
        }
        let y3 = mult_approx(y2.value() / norm, *g1, net.t2, depth)?;
        out.add(norm * y3);
    }
    debug_assert_eq!(rows[0].len(), side);
    Ok(out.value())
}

/// d = 1 evaluation with the multiprecision filter values, at grid index m.
pub fn eval_gnn_hp(net: &GnnSpec, m: i64) -> Result<Float> {
    if net.dim != 1 {
        return Err(Error::Config("multiprecision evaluation is one-dimensional".into()));
    }
    if m.abs() > net.params.l_s() {
        return Err(Error::DomainError { value: m as f64 * net.params.tau(), lo: -1.0, hi: 1.0 });
    }
    let table = filter_table(&net.params, net.quad_tables.mode)?;
    let nh = net.params.n_half as i64;
    let mut acc = Float::new(table.prec + 32);
    for (n, w) in (-nh..=nh).zip(&net.sample_weights) {
        if w.value != 0.0 {
            acc += Float::with_val(table.prec + 32, w.value) * table.value_mp(panel_steps(n, m, &net.params))?;
        }
    }
    Ok(Float::with_val(table.prec, acc))
}
