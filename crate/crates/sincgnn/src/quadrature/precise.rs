//! Multiprecision reference for the ramp convolution on the quadrature grid.
//!
//! In lattice units u = y/h the grid nodes are u_j = −M + j/k with k the
//! stride h/τ, and the convolution up to node L reduces to
//! ∫_{−M}^{u_L} (u_L − u) g''(u) du, independent of h. We integrate g'' and
//! u·g'' over every grid cell with Gauss–Legendre rules of 32 and 64 points,
//! compare the two, and bisect cells where they disagree. Cumulative sums then
//! give every L at once.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::kernel::{sinc_gauss_derivs_mp, KernelParams};

const RULE_LO: usize = 32;
const RULE_HI: usize = 64;
const MAX_DEPTH: u32 = 12;

/// Gauss–Legendre nodes and weights on [−1, 1] at `prec` bits.
pub fn gauss_legendre(p: usize, prec: u32) -> (Vec<Float>, Vec<Float>) {
    let wp = prec + 32;
    let mut nodes = Vec::with_capacity(p);
    let mut weights = Vec::with_capacity(p);
    let legendre = |x: &Float| -> (Float, Float) {
        // returns (P_p(x), P_{p−1}(x))
        let mut p0 = Float::with_val(wp, 1u32);
        let mut p1 = x.clone();
        for k in 1..p as u32 {
            let a = Float::with_val(wp, x * &p1) * (2 * k + 1);
            let b = Float::with_val(wp, &p0 * k);
            let p2 = (a - b) / (k + 1);
            p0 = p1;
            p1 = p2;
        }
        (p1, p0)
    };
    let iters = 3 + (prec as f64 / 40.0).log2().ceil().max(0.0) as usize;
    for i in 0..p {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (p as f64 + 0.5)).cos();
        let mut x = Float::with_val(wp, guess);
        for _ in 0..iters + 2 {
            let (pp, pm) = legendre(&x);
            let x2m1 = Float::with_val(wp, x.square_ref()) - 1u32;
            let dp = (Float::with_val(wp, &x * &pp) - &pm) * p as u32 / &x2m1;
            x -= pp / &dp;
        }
        let (pp, pm) = legendre(&x);
        let x2m1 = Float::with_val(wp, x.square_ref()) - 1u32;
        let dp = (Float::with_val(wp, &x * &pp) - &pm) * p as u32 / &x2m1;
        let w = Float::with_val(wp, 2u32) / (-x2m1 * Float::with_val(wp, dp.square_ref()));
        nodes.push(Float::with_val(prec, &x));
        weights.push(Float::with_val(prec, &w));
    }
    (nodes, weights)
}

/// Reference values conv_L = ∫_{−hM}^{y_L} (y_L − y) K''(y) dy for L = 0..=l_hi.
#[derive(Debug)]
pub struct ConvTable {
    pub prec: u32,
    pub values: Vec<Float>,
    /// Largest 32-versus-64-point disagreement over accepted cells; bounds the
    /// error of the lower rule and is far above that of the higher one.
    pub max_cell_gap: f64,
}

struct Rule {
    w: Vec<Float>, // weights for unit-length interval
    sin: Vec<Float>,
    cos: Vec<Float>,
    e: Vec<Float>, // exp(−δ²/2r²)
    b: Vec<Float>, // exp(−δΔ/r²), recurrence factor per cell
    a: Vec<Float>, // running exp(−u_j δ/r²)
    delta: Vec<Float>,
}

struct Ctx {
    wp: u32,
    pi: Float,
    r2: Float,
    ir2: Float,
}

impl Ctx {
    /// g''(u) from sin πu, cos πu and the Gaussian factor at u.
    fn g2(&self, u: &Float, sin: &Float, cos: &Float, gauss: &Float) -> Float {
        let wp = self.wp;
        let t = Float::with_val(wp, &self.pi * u);
        let u2 = Float::with_val(wp, u.square_ref());
        let tc = Float::with_val(wp, &t * cos);
        let pu = Float::with_val(wp, &self.pi * u);
        let s0 = Float::with_val(wp, sin / &t);
        let s1 = Float::with_val(wp, &tc - sin) / Float::with_val(wp, &pu * u);
        let t2 = Float::with_val(wp, t.square_ref());
        let s2 =
            (Float::with_val(wp, 2u32 - &t2) * sin - Float::with_val(wp, &tc * 2u32)) / Float::with_val(wp, &pu * &u2);
        let g1 = -Float::with_val(wp, u * &self.ir2) * gauss;
        let g2 = (Float::with_val(wp, &u2 * &self.ir2) * &self.ir2 - &self.ir2) * gauss;
        Float::with_val(wp, &s2 * gauss) + Float::with_val(wp, &s1 * &g1) * 2u32 + Float::with_val(wp, &s0 * &g2)
    }
}

fn make_rule(p: usize, width: &Float, m: u32, ctx: &Ctx) -> Rule {
    let wp = ctx.wp;
    let (x, w) = gauss_legendre(p, wp);
    let mut rule = Rule {
        w: Vec::new(),
        sin: Vec::new(),
        cos: Vec::new(),
        e: Vec::new(),
        b: Vec::new(),
        a: Vec::new(),
        delta: Vec::new(),
    };
    for (xi, wi) in x.iter().zip(&w) {
        let t = (Float::with_val(wp, xi + 1u32)) / 2u32;
        let delta = Float::with_val(wp, &t * width);
        let (s, c) = Float::with_val(wp, &ctx.pi * &delta).sin_cos(Float::new(wp));
        let e = Float::with_val(wp, -Float::with_val(wp, delta.square_ref()) * &ctx.ir2 / 2u32).exp();
        let b = Float::with_val(wp, -Float::with_val(wp, &delta * width) * &ctx.ir2).exp();
        // u_0 = −M
        let a = Float::with_val(wp, Float::with_val(wp, &delta * m) * &ctx.ir2).exp();
        rule.w.push(Float::with_val(wp, wi / 2u32));
        rule.sin.push(s);
        rule.cos.push(c);
        rule.e.push(e);
        rule.b.push(b);
        rule.a.push(a);
        rule.delta.push(delta);
    }
    rule
}

/// (∫ g'', ∫ u g'') over [u_j, u_j + Δ] with the recurrence-driven rule; the
/// running Gaussian factors are advanced by one cell.
fn cell_fast(
    rule: &mut Rule,
    u0: &Float,
    s0: &Float,
    c0: &Float,
    g0: &Float,
    width: &Float,
    ctx: &Ctx,
) -> (Float, Float) {
    let wp = ctx.wp;
    let mut i0 = Float::new(wp);
    let mut i1 = Float::new(wp);
    for i in 0..rule.w.len() {
        let u = Float::with_val(wp, u0 + &rule.delta[i]);
        let sin = Float::with_val(wp, s0 * &rule.cos[i]) + Float::with_val(wp, c0 * &rule.sin[i]);
        let cos = Float::with_val(wp, c0 * &rule.cos[i]) - Float::with_val(wp, s0 * &rule.sin[i]);
        let gauss = Float::with_val(wp, g0 * &rule.a[i]) * &rule.e[i];
        let v = ctx.g2(&u, &sin, &cos, &gauss);
        let wv = Float::with_val(wp, &v * &rule.w[i]);
        i1 += Float::with_val(wp, &wv * &u);
        i0 += wv;
        rule.a[i] *= &rule.b[i];
    }
    (i0 * width, i1 * width)
}

fn cell_direct(lo: &Float, hi: &Float, x: &[Float], w: &[Float], ctx: &Ctx) -> (Float, Float) {
    let wp = ctx.wp;
    let half = Float::with_val(wp, hi - lo) / 2u32;
    let mid = Float::with_val(wp, hi + lo) / 2u32;
    let mut i0 = Float::new(wp);
    let mut i1 = Float::new(wp);
    for (xi, wi) in x.iter().zip(w) {
        let u = Float::with_val(wp, &mid + Float::with_val(wp, &half * xi));
        let [_, _, g2] = sinc_gauss_derivs_mp(&u, &ctx.r2, wp);
        let wv = Float::with_val(wp, &g2 * wi);
        i1 += Float::with_val(wp, &wv * &u);
        i0 += wv;
    }
    (i0 * &half, i1 * &half)
}

fn gap(a: &(Float, Float), b: &(Float, Float)) -> f64 {
    let d0 = Float::with_val(64, &a.0 - &b.0).abs().to_f64();
    let d1 = Float::with_val(64, &a.1 - &b.1).abs().to_f64();
    d0.max(d1)
}

fn refine(
    lo: &Float,
    hi: &Float,
    hi_rule: &(Vec<Float>, Vec<Float>),
    tol: f64,
    depth: u32,
    ctx: &Ctx,
) -> Result<(Float, Float)> {
    let wp = ctx.wp;
    let mid = Float::with_val(wp, hi + lo) / 2u32;
    let whole = cell_direct(lo, hi, &hi_rule.0, &hi_rule.1, ctx);
    let l = cell_direct(lo, &mid, &hi_rule.0, &hi_rule.1, ctx);
    let r = cell_direct(&mid, hi, &hi_rule.0, &hi_rule.1, ctx);
    let halves = (Float::with_val(wp, &l.0 + &r.0), Float::with_val(wp, &l.1 + &r.1));
    let g = gap(&whole, &halves);
    if g <= tol {
        return Ok(halves);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::OracleFailure { tol, estimate: g, refinements: depth as usize });
    }
    let a = refine(lo, &mid, hi_rule, tol / 2.0, depth + 1, ctx)?;
    let b = refine(&mid, hi, hi_rule, tol / 2.0, depth + 1, ctx)?;
    Ok((a.0 + b.0, a.1 + b.1))
}

/// Exact r² of the double-precision width.
pub(crate) fn r_squared(r: f64, prec: u32) -> Float {
    let r = Float::with_val(prec, r);
    Float::with_val(prec, r.square_ref())
}

/// Grid node u_j = (j − S)/k as an exact rational.
pub(crate) fn node_u(j: i64, params: &KernelParams) -> Rational {
    Rational::from((Integer::from(j - params.support_steps()), Integer::from(params.stride())))
}

fn build(params: &KernelParams, l_hi: usize, prec: u32) -> Result<ConvTable> {
    let wp = prec + 128;
    let pi = Float::with_val(wp, Constant::Pi);
    let r2 = r_squared(params.r, wp);
    let ir2 = Float::with_val(wp, 1u32 / &r2);
    let ctx = Ctx { wp, pi, r2, ir2 };
    let stride = params.stride();
    let s_steps = params.support_steps();
    let width = Float::with_val(wp, 1u32) / stride as u32;
    let mut lo_rule = make_rule(RULE_LO, &width, params.m, &ctx);
    let mut hi_rule = make_rule(RULE_HI, &width, params.m, &ctx);
    let direct_hi = gauss_legendre(RULE_HI, wp);
    let tol = 2f64.powi(-(prec as i32 - 40));

    let cells = l_hi.min(2 * s_steps as usize);
    let mut c0 = vec![Float::new(wp)];
    let mut c1 = vec![Float::new(wp)];
    let mut max_gap = 0.0f64;
    for j in 0..cells {
        let u0 = Float::with_val(wp, node_u(j as i64, params));
        let (s0, k0) = Float::with_val(wp, &ctx.pi * &u0).sin_cos(Float::new(wp));
        let g0 = Float::with_val(wp, -Float::with_val(wp, u0.square_ref()) * &ctx.ir2 / 2u32).exp();
        let a = cell_fast(&mut lo_rule, &u0, &s0, &k0, &g0, &width, &ctx);
        let b = cell_fast(&mut hi_rule, &u0, &s0, &k0, &g0, &width, &ctx);
        let g = gap(&a, &b);
        let (i0, i1) = if g <= tol {
            max_gap = max_gap.max(g);
            b
        } else {
            let u1 = Float::with_val(wp, node_u(j as i64 + 1, params));
            refine(&u0, &u1, &direct_hi, tol, 0, &ctx)?
        };
        let n0 = Float::with_val(wp, &c0[j] + &i0);
        let n1 = Float::with_val(wp, &c1[j] + &i1);
        c0.push(n0);
        c1.push(n1);
    }
    let mut values = Vec::with_capacity(l_hi + 1);
    for l in 0..=l_hi {
        let idx = l.min(cells);
        let ul = Float::with_val(wp, node_u(l as i64, params));
        let v = Float::with_val(wp, &ul * &c0[idx]) - &c1[idx];
        values.push(Float::with_val(prec, v));
    }
    Ok(ConvTable { prec, values, max_cell_gap: max_gap })
}

type Key = ([u64; 3], u32, u32, usize, u32);

fn key(params: &KernelParams, l_hi: usize, prec: u32) -> Key {
    ([params.r.to_bits(), params.h.to_bits(), params.beta.to_bits()], params.m, params.n_half, l_hi, prec)
}

/// Memoized [`ConvTable`] covering L = 0..=l_hi at `prec` bits.
pub fn conv_table(params: &KernelParams, l_hi: usize, prec: u32) -> Result<Arc<ConvTable>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<ConvTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let k = key(params, l_hi, prec);
    if let Some(t) = cache.lock().unwrap().get(&k) {
        return Ok(t.clone());
    }
    params.validate()?;
    let t = Arc::new(build(params, l_hi, prec)?);
    cache.lock().unwrap().insert(k, t.clone());
    Ok(t)
}
