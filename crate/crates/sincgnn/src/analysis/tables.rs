//! Exact-rational tables for the Newton–Cotes error analysis.

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::error::Result;
use crate::quadrature::{exact_weights, factorial_poly_integral};

/// One row: ∫₀^L π_L for odd L, ∫₀^L u·π_L for even L.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorialPolyRow {
    pub order: usize,
    pub weighted: bool,
    /// Exact value as "numerator/denominator".
    pub value: String,
    pub value_f64: f64,
    /// |value| / L!.
    pub ratio_to_factorial: f64,
    /// L! for odd L, 5·L! for even L.
    pub bound_factor: f64,
    pub negative: bool,
    pub within_bound: bool,
}

fn factorial(n: usize) -> Integer {
    Integer::from(Integer::factorial(n as u32))
}

pub fn factorial_poly_table(l_max: usize) -> Result<Vec<FactorialPolyRow>> {
    let mut rows = Vec::with_capacity(l_max);
    for order in 1..=l_max {
        let weighted = order % 2 == 0;
        let v = factorial_poly_integral(order, weighted)?;
        let bound_factor = if weighted { 5.0 } else { 1.0 };
        let ratio = v.clone().abs() / Rational::from(factorial(order));
        rows.push(FactorialPolyRow {
            order,
            weighted,
            value: format!("{}/{}", v.numer(), v.denom()),
            value_f64: v.to_f64(),
            ratio_to_factorial: ratio.to_f64(),
            bound_factor,
            negative: v < 0,
            within_bound: ratio <= bound_factor as u32,
        });
    }
    Ok(rows)
}

/// Largest |Σ a_l l^k − L^{k+1}/(k+1)| over k ≤ L and L ≤ `l_max`, exactly;
/// zero means every rule integrates its monomials exactly.
pub fn nc_exactness_defect(l_max: usize) -> Result<Rational> {
    let mut worst = Rational::new();
    for order in 1..=l_max {
        let w = exact_weights(order)?;
        for k in 0..=order as u32 {
            let mut s = Rational::new();
            for (l, a) in w.iter().enumerate() {
                s += Rational::from(a * Integer::from(l).pow(k));
            }
            let exact = Rational::from((Integer::from(order).pow(k + 1), Integer::from(k + 1)));
            let d = (s - exact).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}
