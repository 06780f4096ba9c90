//! ReLU realizations of products.
//!
//! [`mult_exact`] uses the hat function smoothed by a unit box, which equals
//! u²/2 on [0, 1]; it is exact for nonnegative inputs. [`mult_approx`] uses the
//! sawtooth squaring network f_m(u) = u − Σ_{s=1}^{m} g_s(u)/4^s, where g_s is
//! the s-fold composition of the tooth g(u) = 𝔴(2u). On [0, 1] it is within
//! 2^{−2m−2} of u², and f_m(0) = 0.

use crate::error::{Error, Result};

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// 𝔴(x) = ReLU(x) − 2ReLU(x−1) + ReLU(x−2).
pub fn hat_w(x: f64) -> f64 {
    relu(x) - 2.0 * relu(x - 1.0) + relu(x - 2.0)
}

/// (𝔴 ∗ χ_[0,1])(u), piecewise quadratic with support [0, 3].
pub fn smoothed_hat(u: f64) -> f64 {
    if u <= 0.0 || u >= 3.0 {
        0.0
    } else if u <= 1.0 {
        0.5 * u * u
    } else if u <= 2.0 {
        -u * u + 3.0 * u - 1.5
    } else {
        0.5 * (3.0 - u) * (3.0 - u)
    }
}

fn check(v: f64, lo: f64, hi: f64) -> Result<()> {
    if v.is_nan() || v < lo || v > hi {
        Err(Error::DomainError { value: v, lo, hi })
    } else {
        Ok(())
    }
}

/// Exact product of x, y ∈ [0, T] from three smoothed hats.
pub fn mult_exact(x: f64, y: f64, t: f64) -> Result<f64> {
    check(x, 0.0, t)?;
    check(y, 0.0, t)?;
    let s = 2.0 * t;
    Ok(4.0 * t * t * (smoothed_hat((x + y) / s) - smoothed_hat(x / s) - smoothed_hat(y / s)))
}

/// Sawtooth approximation of u² on [0, 1] with `m` teeth.
pub fn square_approx(u: f64, m: u32) -> f64 {
    let mut g = u;
    let mut acc = u;
    let mut scale = 1.0;
    for _ in 0..m {
        g = hat_w(2.0 * g);
        scale *= 0.25;
        acc -= g * scale;
    }
    acc
}

/// Approximate product of x, y ∈ [−T, T].
///
/// Polarization xy = ((|x+y|)² − |x|² − |y|²)/2 with every square taken on
/// [0, 1] after dividing by 2T. An input of 0 makes two of the squares
/// identical and the third 0, so the result is exactly 0. Error at most
/// 1.5·T²·2^{−2m}.
pub fn mult_approx(x: f64, y: f64, t: f64, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::Config("multiplication depth must be at least 1".into()));
    }
    check(x, -t, t)?;
    check(y, -t, t)?;
    let r = 2.0 * t;
    let q = |v: f64| square_approx(v.abs() / r, m);
    Ok(0.5 * r * r * (q(x + y) - q(x) - q(y)))
}

/// Domain used at step k of a chain: the partial product of k − 1 inputs can
/// reach T^{k−1}, and a factor 2 absorbs the accumulated error.
fn chain_domain(t: f64, k: usize) -> f64 {
    2.0 * t.max(t.powi(k as i32 - 1))
}

/// ×̃(x_d, ×̃(x_{d−1}, … ×̃(x_2, x_1))).
pub fn mult_chain(values: &[f64], t: f64, m: u32) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Config("a product chain needs at least two factors".into()));
    }
    for &v in values {
        check(v, -t, t)?;
    }
    let mut acc = values[0];
    for (k, &v) in values.iter().enumerate().skip(1) {
        acc = mult_approx(v, acc, chain_domain(t, k + 1), m)?;
    }
    Ok(acc)
}

/// Error bound for [`mult_chain`] over `len` factors of size ≤ T: step k adds
/// 1.5·D_k²·2^{−2m} and scales the earlier error by at most T.
pub fn chain_error_bound(len: usize, t: f64, m: u32) -> f64 {
    let mut e = 0.0;
    for k in 2..=len {
        let dk = chain_domain(t, k);
        e = t * e + 1.5 * dk * dk * 2f64.powi(-2 * m as i32);
    }
    e
}

/// Stand-in for [`mult_chain`] over a single factor: the identity.
pub(crate) fn mult_flat(values: &[f64], t: f64, m: u32) -> Result<f64> {
    match values.len() {
        0 => Ok(1.0),
        1 => {
            check(values[0], -t, t)?;
            Ok(values[0])
        }
        _ => mult_chain(values, t, m),
    }
}

/// Weights of one squaring network: a tooth is three ReLUs with input weight,
/// bias and output weight each; the output combines u and every g_s.
pub fn square_weight_count(m: u32) -> u64 {
    9 * m as u64 + m as u64 + 1
}

/// Weights of one approximate product: three squarings, two ReLUs per
/// absolute value, three combination weights for the polarization.
pub fn mult_weight_count(m: u32) -> u64 {
    3 * square_weight_count(m) + 3 * 2 + 3
}

/// ReLU depth of one approximate product: one for |·|, m teeth, one output.
pub fn mult_layer_count(m: u32) -> u64 {
    m as u64 + 2
}
