//! Newton–Cotes discretization of the ramp convolution on the τ-grid.
//!
//! For x = mτ and a lattice node hn the integration range [−hM, x − hn] holds
//! L(n, x) = m + S − k·n grid steps, S = hM/τ and k = h/τ. The discrete value
//! depends on (n, x) only through L, so one table indexed by L serves every
//! node pair. Values are accumulated in multiprecision and rounded once.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use super::newton_cotes::exact_weights;
use super::precise::{node_u, r_squared};
use crate::error::{Error, Result};
use crate::kernel::{sinc_gauss_derivs_mp, KernelParams};

/// How a range of L grid steps is split into Newton–Cotes panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum QuadMode {
    /// One closed panel of order L with exact rational weights while L is at
    /// most the panel cap; beyond it, near-equal panels each of order ≥ L_s.
    #[default]
    #[serde(rename = "single-panel-rational")]
    SinglePanelRational,
    /// Composite Simpson, with one 3/8 panel for odd L and the trapezoid for L = 1.
    #[serde(rename = "composite")]
    Composite,
}

impl QuadMode {
    pub fn name(&self) -> &'static str {
        match self {
            QuadMode::SinglePanelRational => "single-panel-rational",
            QuadMode::Composite => "composite",
        }
    }

    /// Largest single-panel order used for these parameters.
    pub fn panel_cap(&self, params: &KernelParams) -> usize {
        match self {
            QuadMode::SinglePanelRational => 64usize.max(2 * params.l_s() as usize - 1),
            QuadMode::Composite => 3,
        }
    }

    /// Panel orders for a range of `l` steps, in order.
    pub fn panels(&self, l: usize, params: &KernelParams) -> Vec<usize> {
        if l == 0 {
            return Vec::new();
        }
        match self {
            QuadMode::SinglePanelRational => {
                let cap = self.panel_cap(params);
                let k = l.div_ceil(cap);
                let (base, extra) = (l / k, l % k);
                (0..k).map(|i| base + usize::from(i < extra)).collect()
            }
            QuadMode::Composite => {
                if l == 1 {
                    vec![1]
                } else if l.is_multiple_of(2) {
                    vec![2; l / 2]
                } else {
                    let mut v = vec![2; (l - 3) / 2];
                    v.push(3);
                    v
                }
            }
        }
    }

    /// Working precision for the table: enough to absorb the cancellation of
    /// alternating weights of the largest panel.
    pub fn precision(&self, params: &KernelParams) -> u32 {
        256 + self.panel_cap(params) as u32
    }
}

/// Number of grid steps L(n, x) for x = mτ.
pub fn panel_steps(n: i64, m: i64, params: &KernelParams) -> i64 {
    m + params.support_steps() - params.stride() * n
}

/// Largest L reached by n ∈ [−N, N] and x ∈ [−1, 1].
pub fn max_steps(params: &KernelParams) -> usize {
    (params.support_steps() + params.stride() * params.n_half as i64 + params.l_s()) as usize
}

/// 𝔊 tabulated by panel length.
#[derive(Debug)]
pub struct FilterTable {
    pub params: KernelParams,
    pub mode: QuadMode,
    pub prec: u32,
    /// K''(y_l) for l = 0..=l_hi, at the table precision, with the node at
    /// −hM taken as the limit from inside the support.
    pub node_values: Vec<Float>,
    pub values_mp: Vec<Float>,
    pub values: Vec<f64>,
}

impl FilterTable {
    pub fn l_hi(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, l: i64) -> Result<f64> {
        self.check(l)?;
        Ok(if l <= 0 { 0.0 } else { self.values[l as usize] })
    }

    pub fn value_mp(&self, l: i64) -> Result<Float> {
        self.check(l)?;
        Ok(if l <= 0 { Float::new(self.prec) } else { self.values_mp[l as usize].clone() })
    }

    fn check(&self, l: i64) -> Result<()> {
        if l > self.l_hi() as i64 {
            return Err(Error::DomainError { value: l as f64, lo: 0.0, hi: self.l_hi() as f64 });
        }
        Ok(())
    }

    /// Per-node tap weights τ²·a_l·(L − l)·h⁻²g''(u_l) whose sum is 𝔊_L, in
    /// node order, as (node index, weight).
    pub fn taps(&self, l: usize) -> Vec<(usize, Float)> {
        let prec = self.prec;
        let k2 = Integer::from(self.params.stride()).square();
        let mut out = vec![Float::new(prec); l + 1];
        let mut start = 0usize;
        for order in self.mode.panels(l, &self.params) {
            let w = exact_weights(order).expect("order within cap");
            for (i, a) in w.iter().enumerate() {
                let node = start + i;
                let c = Float::with_val(prec, a) * (l - node) as u64;
                let t = Float::with_val(prec, &c * &self.node_values[node]) / &k2;
                out[node] += t;
            }
            start += order;
        }
        out.into_iter().enumerate().collect()
    }
}

fn build(params: &KernelParams, mode: QuadMode) -> Result<FilterTable> {
    params.validate()?;
    let prec = mode.precision(params);
    let wp = prec + 32;
    let l_hi = max_steps(params);
    let two_s = 2 * params.support_steps() as usize;
    let r2 = r_squared(params.r, wp);
    let mut node_values = Vec::with_capacity(l_hi + 1);
    for j in 0..=l_hi {
        if j > two_s {
            node_values.push(Float::new(wp));
        } else {
            let u = Float::with_val(wp, node_u(j as i64, params));
            node_values.push(sinc_gauss_derivs_mp(&u, &r2, wp)[2].clone());
        }
    }
    // g'' in lattice units; τ²·h⁻² = 1/k²
    let k2 = Integer::from(params.stride()).square();
    let mut weight_cache: HashMap<usize, Vec<Float>> = HashMap::new();
    let mut values_mp = Vec::with_capacity(l_hi + 1);
    values_mp.push(Float::new(prec));
    for l in 1..=l_hi {
        let mut acc = Float::new(wp);
        let mut start = 0usize;
        for order in mode.panels(l, params) {
            if let std::collections::hash_map::Entry::Vacant(e) = weight_cache.entry(order) {
                let w = exact_weights(order)?;
                e.insert(w.iter().map(|a| Float::with_val(wp, a)).collect());
            }
            let w = &weight_cache[&order];
            for (i, a) in w.iter().enumerate() {
                let node = start + i;
                let t = Float::with_val(wp, a * &node_values[node]) * (l - node) as u64;
                acc += t;
            }
            start += order;
        }
        values_mp.push(Float::with_val(prec, acc / &k2));
    }
    let values = values_mp.iter().map(|v| v.to_f64()).collect();
    let node_values = node_values.into_iter().map(|v| Float::with_val(prec, v)).collect();
    Ok(FilterTable { params: *params, mode, prec, node_values, values_mp, values })
}

type Key = ([u64; 3], u32, u32, QuadMode);

/// Memoized [`FilterTable`]; tables are identical with or without the cache.
pub fn filter_table(params: &KernelParams, mode: QuadMode) -> Result<Arc<FilterTable>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<FilterTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let k = ([params.r.to_bits(), params.h.to_bits(), params.beta.to_bits()], params.m, params.n_half, mode);
    if let Some(t) = cache.lock().unwrap().get(&k) {
        return Ok(t.clone());
    }
    let t = Arc::new(build(params, mode)?);
    cache.lock().unwrap().insert(k, t.clone());
    Ok(t)
}

/// Grid index m with x = mτ, or `OffGrid`.
pub fn grid_index(x: f64, params: &KernelParams) -> Result<i64> {
    let ls = params.l_s() as f64;
    let m = (x * ls).round();
    if (x * ls - m).abs() > 1e-9 {
        return Err(Error::OffGrid { x, step: params.tau() });
    }
    Ok(m as i64)
}

fn check_node(n: i64, x: f64, params: &KernelParams) -> Result<()> {
    let nh = params.n_half as i64;
    if n < -nh || n > nh {
        return Err(Error::DomainError { value: n as f64, lo: -(nh as f64), hi: nh as f64 });
    }
    if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&x) {
        return Err(Error::DomainError { value: x, lo: -1.0, hi: 1.0 });
    }
    Ok(())
}

/// 𝔊(n, x) with rational Newton–Cotes panels.
pub fn discrete_conv_g(n: i64, x: f64, params: &KernelParams) -> Result<f64> {
    discrete_conv_g_with(n, x, params, QuadMode::SinglePanelRational)
}

pub fn discrete_conv_g_with(n: i64, x: f64, params: &KernelParams, mode: QuadMode) -> Result<f64> {
    let m = grid_index(x, params)?;
    check_node(n, x, params)?;
    filter_table(params, mode)?.value(panel_steps(n, m, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{scaled_kernel_second_deriv, DEFAULT_BETA};
    use crate::quadrature::newton_cotes::nc_weights;
    use crate::quadrature::oracle::{oracle_conv, QuadratureOracle};
    use rug::Rational;

    fn p(m: u32, beta: f64) -> KernelParams {
        KernelParams::with_defaults(m, beta).unwrap()
    }

    #[test]
    fn panel_splits() {
        let k = p(8, DEFAULT_BETA);
        let r = QuadMode::SinglePanelRational;
        assert_eq!(r.panel_cap(&k), 79);
        assert_eq!(r.panels(40, &k), vec![40]);
        assert_eq!(r.panels(280, &k), vec![70, 70, 70, 70]);
        assert_eq!(r.panels(81, &k), vec![41, 40]);
        let c = QuadMode::Composite;
        assert_eq!(c.panels(1, &k), vec![1]);
        assert_eq!(c.panels(4, &k), vec![2, 2]);
        assert_eq!(c.panels(7, &k), vec![2, 2, 3]);
        for l in 1..400 {
            for mode in [r, c] {
                let v = mode.panels(l, &k);
                assert_eq!(v.iter().sum::<usize>(), l);
                if mode == r && l >= k.l_s() as usize {
                    assert!(v.iter().all(|&o| o >= k.l_s() as usize && o <= 79));
                }
            }
        }
    }

    #[test]
    fn step_bookkeeping_is_exact() {
        // L·τ = x + hM − hn in rationals
        for (m_, beta) in [(8u32, 0.05), (4, 0.125), (12, 0.05)] {
            let k = p(m_, beta);
            let ls = k.l_s();
            let h = Rational::from((4, m_));
            let tau = Rational::from((1, ls));
            for n in -(k.n_half as i64)..=k.n_half as i64 {
                for m in -ls..=ls {
                    let l = panel_steps(n, m, &k);
                    let lhs = Rational::from(&tau * l);
                    let rhs = Rational::from(&tau * m) + Rational::from(&h * m_) - Rational::from(&h * n);
                    assert_eq!(lhs, rhs);
                    assert!(l >= ls && l as usize <= max_steps(&k));
                }
            }
        }
    }

    #[test]
    fn empty_range_is_zero() {
        let k = p(8, DEFAULT_BETA);
        let t = filter_table(&k, QuadMode::SinglePanelRational).unwrap();
        assert_eq!(t.value(0).unwrap(), 0.0);
    }

    #[test]
    fn smallest_panel_matches_oracle() {
        let k = p(8, DEFAULT_BETA);
        let o = QuadratureOracle::default();
        let g = discrete_conv_g(k.n_half as i64, -1.0, &k).unwrap();
        let want = oracle_conv(k.n_half as i64, -1.0, &k, &o).unwrap();
        assert!((g - want).abs() <= 2f64.powi(-8), "{g} vs {want}");
        assert!((g - want).abs() <= 1e-11);
    }

    #[test]
    fn worked_configuration() {
        let k = p(4, 0.125);
        let o = QuadratureOracle::default();
        let g = discrete_conv_g(2, -1.0, &k).unwrap();
        let want = oracle_conv(2, -1.0, &k, &o).unwrap();
        assert!((g - want).abs() <= 1e-3);
        assert!(matches!(discrete_conv_g(2, -1.0 + 0.01, &k), Err(Error::OffGrid { .. })));
        assert!(matches!(discrete_conv_g(3, 0.0, &k), Err(Error::DomainError { .. })));
    }

    /// Independent route for a low-order panel: double weights times
    /// double kernel values.
    #[test]
    fn composite_matches_double_route() {
        let k = p(4, 0.125);
        let t = filter_table(&k, QuadMode::Composite).unwrap();
        let tau = k.tau();
        for l in [1usize, 2, 5, 8, 17] {
            let mut acc = 0.0;
            let mut start = 0;
            for order in QuadMode::Composite.panels(l, &k) {
                let rule = nc_weights(order, tau).unwrap();
                for (i, w) in rule.weights.iter().enumerate() {
                    let node = start + i;
                    let y = -k.support() + node as f64 * tau;
                    let kv = if node == 0 {
                        crate::kernel::scaled_kernel_untruncated(y, &k)[2]
                    } else {
                        scaled_kernel_second_deriv(y, &k)
                    };
                    acc += w * (l - node) as f64 * tau * kv;
                }
                start += order;
            }
            assert!((t.values[l] - acc).abs() < 1e-12 * (1.0 + acc.abs()), "L={l}");
        }
    }

    #[test]
    fn taps_sum_to_value() {
        let k = p(4, 0.125);
        let t = filter_table(&k, QuadMode::SinglePanelRational).unwrap();
        for l in [3usize, 8, 20] {
            let s = t.taps(l).into_iter().fold(Float::new(t.prec), |a, (_, w)| a + w);
            let d = Float::with_val(64, &s - &t.values_mp[l]).abs().to_f64();
            assert!(d < 1e-60);
        }
    }
}
