//! The network as an aggregation on the τ-grid graph.
//!
//! Node i⃗ of the computation grid sits at τ·i⃗ with |i_k| ≤ S = hM/τ. At a
//! prediction node the network aggregates the sample features f(h·n⃗) held by
//! the lattice nodes h·n⃗ = τ·(k·n⃗), with weight ∏ 𝔊(n_k, x_k). Each 𝔊 is
//! itself a sum of taps a_l·ReLU_{hn}(x − y_l)·K''(y_l) over computation nodes
//! x − y_l, exposed through [`GraphFilter::taps`].

use rug::Float;

use super::gnn::GnnSpec;
use crate::cardinal::GridSpec;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::quadrature::{filter_table, panel_steps};

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    /// Computation-grid index of the lattice node h·n⃗.
    pub node: Vec<i64>,
    /// Lattice index n⃗, which selects the feature f(h·n⃗).
    pub sample: Vec<i64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tap {
    /// Grid index of the feature node x − y_l.
    pub node: i64,
    /// Computation-grid index of the kernel node y_l, in [−S, S].
    pub offset: i64,
    pub weight: Float,
}

#[derive(Debug, Clone)]
pub struct GraphFilter<'a> {
    pub net: &'a GnnSpec,
    pub computation: GridSpec,
    pub prediction: GridSpec,
}

pub fn as_graph_filter(net: &GnnSpec) -> GraphFilter<'_> {
    GraphFilter {
        net,
        computation: GridSpec::computation(&net.params, net.dim),
        prediction: GridSpec::prediction(&net.params, net.dim),
    }
}

impl GraphFilter<'_> {
    /// Largest grid distance between a node and any tap node, S.
    pub fn hop_radius(&self) -> i64 {
        self.net.params.support_steps()
    }

    /// Grid indices of the prediction nodes, last coordinate fastest.
    pub fn prediction_nodes(&self) -> Vec<Vec<i64>> {
        let ls = self.net.params.l_s();
        crate::numeric::box_indices(&vec![-ls; self.net.dim], &vec![ls; self.net.dim])
    }

    /// Weighted lattice neighbors of the prediction node τ·m⃗, in sample order.
    pub fn neighbors(&self, m: &[i64]) -> Result<Vec<Neighbor>> {
        let x: Vec<f64> = m.iter().map(|&mk| mk as f64 * self.net.params.tau()).collect();
        let m = self.net.prediction_index(&x)?;
        let rows: Vec<Vec<f64>> = m.iter().map(|&mk| self.net.filter_row(mk)).collect();
        let nh = self.net.params.n_half as i64;
        let k = self.net.params.stride();
        Ok(self
            .net
            .sample_weights
            .iter()
            .map(|w| Neighbor {
                node: w.n.iter().map(|&nk| k * nk).collect(),
                sample: w.n.clone(),
                weight: w.n.iter().zip(&rows).map(|(&nk, r)| r[(nk + nh) as usize]).product(),
            })
            .collect())
    }

    /// Σ weight·feature over the neighbors, accumulated like the network.
    pub fn aggregate(&self, m: &[i64]) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for (nb, w) in self.neighbors(m)?.iter().zip(&self.net.sample_weights) {
            if w.value != 0.0 {
                acc.add(w.value * nb.weight);
            }
        }
        Ok(acc.value())
    }

    /// Taps of the one-dimensional filter 𝔊(n, τm), all within
    /// [`hop_radius`](Self::hop_radius) of the node m.
    pub fn taps(&self, n: i64, m: i64) -> Result<Vec<Tap>> {
        let p = &self.net.params;
        let nh = p.n_half as i64;
        if n.abs() > nh || m.abs() > p.l_s() {
            return Err(Error::DomainError { value: n as f64, lo: -(nh as f64), hi: nh as f64 });
        }
        let l = panel_steps(n, m, p);
        if l <= 0 {
            return Ok(Vec::new());
        }
        let table = filter_table(p, self.net.quad_tables.mode)?;
        let s = p.support_steps();
        Ok(table
            .taps(l as usize)
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(j, weight)| Tap { node: m + s - j as i64, offset: j as i64 - s, weight })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{KernelParams, DEFAULT_BETA};
    use crate::network::{build_gnn, eval_gnn};
    use crate::signal::random_signal;

    #[test]
    fn one_dim_aggregation_is_bit_exact() {
        let p = KernelParams::with_defaults(8, DEFAULT_BETA).unwrap();
        let net = build_gnn(&random_signal(std::f64::consts::FRAC_PI_2, 1, 5, 2), &p).unwrap();
        let g = as_graph_filter(&net);
        for m in g.prediction_nodes() {
            let x = [m[0] as f64 * p.tau()];
            assert_eq!(g.aggregate(&m).unwrap().to_bits(), eval_gnn(&net, &x).unwrap().to_bits());
        }
    }

    #[test]
    fn two_dim_aggregation_within_tolerance() {
        let p = KernelParams::with_defaults(4, 0.125).unwrap();
        let net = build_gnn(&random_signal(std::f64::consts::FRAC_PI_2, 2, 3, 2), &p).unwrap();
        let g = as_graph_filter(&net);
        assert_eq!(g.computation.len(), 65 * 65);
        assert_eq!(g.prediction_nodes().len(), 17 * 17);
        for m in g.prediction_nodes() {
            let x: Vec<f64> = m.iter().map(|&v| v as f64 * p.tau()).collect();
            assert!((g.aggregate(&m).unwrap() - eval_gnn(&net, &x).unwrap()).abs() <= net.mult_tolerance());
        }
    }

    #[test]
    fn taps_sum_and_stay_in_the_window() {
        let p = KernelParams::with_defaults(8, DEFAULT_BETA).unwrap();
        let net = build_gnn(&random_signal(1.0, 1, 2, 2), &p).unwrap();
        let g = as_graph_filter(&net);
        let table = filter_table(&p, net.quad_tables.mode).unwrap();
        let s = p.support_steps();
        for (n, m) in [(-4, -40), (0, 0), (2, 13), (4, 40)] {
            let taps = g.taps(n, m).unwrap();
            let mut sum = Float::new(table.prec);
            for t in &taps {
                assert!((t.node - m).abs() <= g.hop_radius());
                assert!(t.offset.abs() <= s);
                assert_eq!(t.node, m - t.offset);
                sum += &t.weight;
            }
            let v = table.value_mp(panel_steps(n, m, &p)).unwrap();
            let diff = Float::with_val(table.prec, &sum - &v).abs().to_f64();
            assert!(diff <= 1e-40 * (1.0 + v.to_f64().abs()), "n={n} m={m}");
        }
        for nb in g.neighbors(&[7]).unwrap() {
            assert!((nb.node[0] - 7).abs() <= g.hop_radius());
        }
    }
}
