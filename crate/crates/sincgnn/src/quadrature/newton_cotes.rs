//! Closed Newton–Cotes weights in exact rational arithmetic.
//!
//! For unit spacing the weight of node l is
//! a_l = ∫₀^L ∏_{j≠l} (u−j)/(l−j) du. We expand π(u) = ∏_{j=0}^{L} (u−j) once,
//! divide it by (u−l) synthetically, integrate termwise against a common
//! denominator and divide by ∏_{j≠l}(l−j). Weights are symmetric, so only half
//! of them are computed.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Largest order converted to `f64` weights by [`nc_weights`].
pub const FLOAT_ORDER_CAP: usize = 64;

/// Largest order accepted by [`exact_weights`].
pub const EXACT_ORDER_CAP: usize = 1024;

/// Closed Newton–Cotes rule of order L on spacing τ.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonCotesRule {
    pub order: usize,
    pub tau: f64,
    /// Unit-spacing weights, exact.
    pub exact: Arc<Vec<Rational>>,
    /// `exact[l]·τ` rounded once to the nearest double.
    pub weights: Vec<f64>,
}

impl NewtonCotesRule {
    pub fn apply(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.order + 1);
        crate::numeric::dot_compensated(&self.weights, values)
    }
}

fn cache() -> &'static Mutex<HashMap<usize, Arc<Vec<Rational>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Rational>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Exact unit-spacing weights a_0..a_L, memoized per order.
pub fn exact_weights(order: usize) -> Result<Arc<Vec<Rational>>> {
    if order == 0 {
        return Err(Error::Config("Newton-Cotes order must be at least 1".into()));
    }
    if order > EXACT_ORDER_CAP {
        return Err(Error::OrderTooHigh { order, cap: EXACT_ORDER_CAP });
    }
    if let Some(w) = cache().lock().unwrap().get(&order) {
        return Ok(w.clone());
    }
    let w = Arc::new(compute_weights(order));
    cache().lock().unwrap().insert(order, w.clone());
    Ok(w)
}

/// Integer coefficients of ∏_{j=0}^{L}(u − j), lowest degree first.
pub(crate) fn falling_poly(order: usize) -> Vec<Integer> {
    let mut p = vec![Integer::from(1)];
    for j in 0..=order as u64 {
        let mut q = vec![Integer::new(); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            q[k + 1] += c;
            q[k] -= Integer::from(c * j);
        }
        p = q;
    }
    p
}

fn compute_weights(order: usize) -> Vec<Rational> {
    let l_max = order;
    let p = falling_poly(l_max);
    let mut d = Integer::from(1);
    for k in 1..=(l_max as u32 + 1) {
        d.lcm_u_mut(k);
    }
    // j_k = (D/(k+1))·L^{k+1} = D·∫₀^L u^k du
    let mut j = Vec::with_capacity(l_max + 1);
    let mut lp = Integer::from(l_max);
    for k in 0..=l_max {
        j.push(Integer::from(&d / (k as u32 + 1)) * &lp);
        lp *= l_max as u32;
    }
    let mut fact = vec![Integer::from(1)];
    for k in 1..=l_max {
        let next = Integer::from(&fact[k - 1] * k as u32);
        fact.push(next);
    }
    let half = l_max / 2;
    let mut out = vec![Rational::new(); l_max + 1];
    for l in 0..=half {
        // q(u) = π(u)/(u − l); q_{k−1} = p_k + l·q_k
        let mut qk = Integer::new();
        let mut s = Integer::new();
        for k in (1..=l_max + 1).rev() {
            qk *= l as u32;
            qk += &p[k];
            s += Integer::from(&qk * &j[k - 1]);
        }
        let mut den = Integer::from(&fact[l] * &fact[l_max - l]) * &d;
        if (l_max - l) % 2 == 1 {
            den = -den;
        }
        let w = Rational::from((s, den));
        out[l_max - l] = w.clone();
        out[l] = w;
    }
    out
}

/// Weights for spacing τ as doubles; orders above [`FLOAT_ORDER_CAP`] are
/// rejected because the alternating weights exceed what double sums tolerate.
pub fn nc_weights(order: usize, tau: f64) -> Result<NewtonCotesRule> {
    if order > FLOAT_ORDER_CAP {
        return Err(Error::OrderTooHigh { order, cap: FLOAT_ORDER_CAP });
    }
    let exact = exact_weights(order)?;
    let weights = exact.iter().map(|a| a.to_f64() * tau).collect();
    Ok(NewtonCotesRule { order, tau, exact, weights })
}

/// Diagnostic CSV with columns L, l, numerator, denominator.
pub fn weights_csv(orders: &[usize]) -> Result<String> {
    let mut s = String::from("L,l,numerator,denominator\n");
    for &order in orders {
        let w = exact_weights(order)?;
        for (l, a) in w.iter().enumerate() {
            let _ = writeln!(s, "{order},{l},{},{}", a.numer(), a.denom());
        }
    }
    Ok(s)
}

/// ∫₀^L π_L(u) du (`weighted = false`) or ∫₀^L u·π_L(u) du (`weighted = true`),
/// with π_L(u) = u(u−1)⋯(u−L).
pub fn factorial_poly_integral(order: usize, weighted: bool) -> Result<Rational> {
    if order == 0 {
        return Err(Error::Config("L must be at least 1".into()));
    }
    let p = falling_poly(order);
    let shift = usize::from(weighted);
    let mut acc = Rational::new();
    let mut lp = Integer::from(order).pow((shift + 1) as u32);
    for (k, c) in p.iter().enumerate() {
        let deg = (k + shift + 1) as u32;
        acc += Rational::from((Integer::from(c * &lp), Integer::from(deg)));
        lp *= order as u32;
    }
    Ok(acc)
}

/// Smallest integer U such that log u ≤ (u−π)²·M/(4L) for every u ≥ U.
///
/// Only a diagnostic: U enters error bounds, never the construction.
pub fn u_choice(order: usize, m: u32) -> u64 {
    let c = m as f64 / (4.0 * order as f64);
    let f = |u: f64| c * (u - std::f64::consts::PI).powi(2) - u.ln();
    // f is convex on (π, ∞) and negative at π, so it has one root there
    let mut lo = std::f64::consts::PI;
    let mut hi = lo + 1.0;
    while f(hi) < 0.0 {
        hi = lo + 2.0 * (hi - lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.ceil() as u64
}
