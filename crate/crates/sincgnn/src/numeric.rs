//! Small numeric helpers shared across modules.

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn sum_compensated<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in it {
        acc.add(v);
    }
    acc.value()
}

pub fn dot_compensated(a: &[f64], b: &[f64]) -> f64 {
    sum_compensated(a.iter().zip(b).map(|(x, y)| x * y))
}

/// All integer vectors in the box ∏ [lo_k, hi_k], last coordinate fastest.
pub fn box_indices(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let d = lo.len();
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = lo.to_vec();
    loop {
        out.push(cur.clone());
        let mut k = d;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < hi[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = lo[k];
        }
    }
}

/// Least-squares slope of y against x; `None` with fewer than two points.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Slope of ln(y) against x.
pub fn log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    ls_slope(x, &ly)
}

/// Decimal rendering with 17 significant digits, stable across platforms.
pub fn fmt17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_lost_bits() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum_compensated(v), 2.0);
    }

    #[test]
    fn box_order() {
        let b = box_indices(&[0, -1], &[1, 0]);
        assert_eq!(b, vec![vec![0, -1], vec![0, 0], vec![1, -1], vec![1, 0]]);
        assert!(box_indices(&[1], &[0]).is_empty());
        assert_eq!(box_indices(&[], &[]), vec![Vec::<i64>::new()]);
    }

    #[test]
    fn slope_of_line() {
        let x = [1.0, 2.0, 3.0];
        let y = [3.0, 5.0, 7.0];
        assert!((ls_slope(&x, &y).unwrap() - 2.0).abs() < 1e-15);
        assert!(ls_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn fmt17_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt17(0.0), "0");
    }
}
