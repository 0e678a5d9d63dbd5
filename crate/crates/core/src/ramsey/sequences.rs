//! Reductions of nonnegative weight sequences used by the extractors.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::Zero;

use super::{check_weights, RamseyError};
use crate::exact::to_rational;
use crate::num;

/// True when every positive entry is either at least `total/q` or equal to
/// one common value.
pub fn is_q_decomposable(seq: &[f64], q: f64) -> bool {
    light_violation(seq, q).is_none()
}

pub(crate) fn light_violation(seq: &[f64], q: f64) -> Option<usize> {
    let total: f64 = seq.iter().sum();
    let mut level = None;
    for (i, &v) in seq.iter().enumerate() {
        if v > 0.0 && v * q < total {
            match level {
                None => level = Some(v),
                Some(w) if w == v => {}
                Some(_) => return Some(i),
            }
        }
    }
    None
}

/// Output of the prefix scan on the normalized, sorted sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Scan {
    /// Indices sorted by nonincreasing value, ties by index.
    pub order: Vec<usize>,
    /// Number of kept leading entries (1-based prefix length).
    pub l: usize,
    /// Last position raised to the common level; equals `l` when the
    /// prefix alone suffices.
    pub b: usize,
    /// `Σ ŷ^p` for the normalized output.
    pub value: f64,
    /// Whether `value ≥ 1` was reached.
    pub found: bool,
}

/// Finds `l` (largest prefix with `x̂^p ≥ 2/q`) and then the smallest `b`
/// with `Σ_{i≤l} x̂_i^p + (b-l) x̂_b^p ≥ 1`.
pub fn decomposition_scan(x: &[f64], q: f64, p: f64) -> Result<Scan, RamseyError> {
    check_weights(x)?;
    let total: f64 = x.iter().sum();
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let pw: Vec<f64> = order.iter().map(|&i| num::pow(x[i] / total, p)).collect();
    let l_max = pw.iter().take_while(|&&v| v * q >= 2.0).count();
    let mut prefix = vec![0.0; pw.len() + 1];
    for i in 0..pw.len() {
        prefix[i + 1] = prefix[i] + pw[i];
    }
    if prefix[l_max] >= 1.0 {
        let l = (1..=l_max).find(|&j| prefix[j] >= 1.0).unwrap_or(l_max);
        return Ok(Scan { order, l, b: l, value: prefix[l], found: true });
    }
    let mut best = (prefix[l_max], l_max);
    for b in l_max + 1..=pw.len() {
        let s = prefix[l_max] + (b - l_max) as f64 * pw[b - 1];
        if s >= 1.0 {
            return Ok(Scan { order, l: l_max, b, value: s, found: true });
        }
        if s > best.0 {
            best = (s, b);
        }
    }
    Ok(Scan { order, l: l_max, b: best.1, value: best.0, found: false })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightDecomposition {
    pub y: Vec<f64>,
    pub p: f64,
    pub q: f64,
    /// Common value of the light entries, if there are any.
    pub omega: Option<f64>,
    /// Indices with `y_i^p ≥ Σ y^p / q`.
    pub heavy_set: Vec<usize>,
    /// Prefix lengths from the scan; `None` when `x` was already decomposable.
    pub l: Option<usize>,
    pub b: Option<usize>,
}

impl WeightDecomposition {
    pub fn powered(&self) -> Vec<f64> {
        self.y.iter().map(|&v| if v > 0.0 { num::pow(v, self.p) } else { 0.0 }).collect()
    }
}

/// Truncates `x` to `y ≤ x` with `{y^p}` `q`-decomposable and
/// `Σ y^p ≥ (Σ x)^p`, where `p = 1 - log log q / log q`.
pub fn decompose_sequence(x: &[f64], q: f64) -> Result<WeightDecomposition, RamseyError> {
    if !(q >= 16.0) {
        return Err(RamseyError::QTooSmall { q, min: 16.0 });
    }
    let lq = num::log2(q);
    decompose_with(x, q, 1.0 - num::log2(lq) / lq)
}

pub(crate) fn decompose_with(x: &[f64], q: f64, p: f64) -> Result<WeightDecomposition, RamseyError> {
    check_weights(x)?;
    let xp: Vec<f64> = x.iter().map(|&v| if v > 0.0 { num::pow(v, p) } else { 0.0 }).collect();
    let (y, l, b) = if is_q_decomposable(&xp, q) {
        (x.to_vec(), None, None)
    } else {
        let scan = decomposition_scan(x, q, p)?;
        let mut y = vec![0.0; x.len()];
        for (pos, &i) in scan.order.iter().enumerate() {
            if pos < scan.l {
                y[i] = x[i];
            } else if pos < scan.b {
                y[i] = x[scan.order[scan.b - 1]];
            }
        }
        (y, Some(scan.l), Some(scan.b))
    };
    let yp: Vec<f64> = y.iter().map(|&v| if v > 0.0 { num::pow(v, p) } else { 0.0 }).collect();
    let total: f64 = yp.iter().sum();
    let heavy_set: Vec<usize> = (0..y.len()).filter(|&i| yp[i] > 0.0 && yp[i] * q >= total).collect();
    let omega = (0..y.len()).find(|&i| yp[i] > 0.0 && yp[i] * q < total).map(|i| y[i]);
    Ok(WeightDecomposition { y, p, q, omega, heavy_set, l, b })
}

/// Checks `‖x‖_{p,∞} ≥ ((1-p)/(2-p))^{1/p} ‖x‖₁^{1/p} / ‖x‖_∞^{(1-p)/p}`,
/// with `‖x‖_{p,∞} = sup_i i^{1/p} x*_i`.
pub fn pinfty_bound_check(x: &[f64], p: f64) -> bool {
    let mut v: Vec<f64> = x.iter().map(|a| num::abs(*a)).filter(|&a| a > 0.0).collect();
    if v.is_empty() {
        return true;
    }
    v.sort_by(|a, b| b.total_cmp(a));
    // Compared in log space: the powers 1/p overflow or underflow for small p.
    let weak = v
        .iter()
        .enumerate()
        .map(|(i, &a)| num::ln((i + 1) as f64) / p + num::ln(a))
        .fold(f64::NEG_INFINITY, f64::max);
    let l1: f64 = v.iter().sum();
    let rhs = (num::ln((1.0 - p) / (2.0 - p)) + num::ln(l1)) / p - num::ln(v[0]) * (1.0 - p) / p;
    rhs <= weak + num::REL_TOL * (1.0 + num::abs(weak))
}

/// Returns `y ≤ x` supported either on the two largest entries or on a
/// level set `{x ≥ ω}` flattened to `ω`, with `Σ √y ≥ √(Σ x)`. Every
/// comparison is exact.
pub fn balance_binary(x: &[f64]) -> Result<Vec<f64>, RamseyError> {
    check_weights(x)?;
    let support = x.iter().filter(|&&v| v > 0.0).count();
    if support <= 2 {
        return Ok(x.to_vec());
    }
    let total = x.iter().fold(BigRational::zero(), |acc, &v| acc + to_rational(v));
    let mut order: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let mut c = 0;
    while c < order.len() {
        let omega = x[order[c]];
        while c < order.len() && x[order[c]] == omega {
            c += 1;
        }
        // c √ω ≥ √total  ⟺  c² ω ≥ total
        let cc = BigRational::from_integer(((c * c) as u64).into());
        if cc * to_rational(omega) >= total {
            let mut y = vec![0.0; x.len()];
            for &i in &order[..c] {
                y[i] = omega;
            }
            return Ok(y);
        }
    }
    let (u, v) = (order[0], order[1]);
    let (a, b) = (to_rational(x[u]), to_rational(x[v]));
    // √a + √b ≥ √S  ⟺  2√(ab) ≥ S - a - b
    let gap = total - &a - &b;
    let four = BigRational::from_integer(4.into());
    if gap <= BigRational::zero() || four * a * b >= &gap * &gap {
        let mut y = vec![0.0; x.len()];
        y[u] = x[u];
        y[v] = x[v];
        return Ok(y);
    }
    unreachable!("one of the level sets or the top pair always balances")
}
