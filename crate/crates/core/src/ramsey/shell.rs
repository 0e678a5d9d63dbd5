//! The recursive ball-and-shell extractor for decomposable weights.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::sequences::{decompose_with, light_violation};
use super::{check_weights, ExtractionResult, RamseyError};
use crate::hst::{HstNode, HstTree};
use crate::metric::{aspect_ratio, FiniteMetric, WeightedMetric};
use crate::num::{self, frac_cmp};

/// `[t log(4 q Φ)]^{-2/t}`.
pub fn beta_phi(t: usize, q: f64, phi: f64) -> f64 {
    let t = t as f64;
    num::pow(t * num::log2(4.0 * q * phi), -2.0 / t)
}

/// The exponent claimed by [`ramsey_phi`] at distortion `alpha` on a space
/// of aspect ratio `phi`: `(1 - log t / t) β(Φ)` with `t = ⌊α/4⌋`, `q = 2^t`.
pub fn phi_exponent(alpha: f64, phi: f64) -> f64 {
    let (t, q, p) = phi_parameters(alpha);
    p * beta_phi(t, q, phi)
}

fn phi_parameters(alpha: f64) -> (usize, f64, f64) {
    let t = num::floor(alpha / 4.0) as usize;
    let tf = t as f64;
    (t, num::exp2(tf), 1.0 - num::log2(tf) / tf)
}

/// Extracts a subset that is `4t`-equivalent to an ultrametric (the map is
/// noncontractive) and satisfies the weighted condition with exponent
/// `β(Φ(X))`. Weights must be `q`-decomposable.
pub fn ramsey_core(wm: &WeightedMetric, t: usize, q: f64) -> Result<ExtractionResult, RamseyError> {
    if t < 8 {
        return Err(RamseyError::TTooSmall { t });
    }
    if !(q >= 2.0) {
        return Err(RamseyError::QTooSmall { q, min: 2.0 });
    }
    let w = wm.weights();
    check_weights(w)?;
    if let Some(index) = light_violation(w, q) {
        return Err(RamseyError::NotDecomposable { index });
    }
    let x = &wm.base;
    let psi = beta_phi(t, q, aspect_ratio(x));
    let tree = shell_tree(x, w, t, q);
    let mut r = ExtractionResult::assemble(x, w, tree, psi, false, Vec::new())?;
    r.trace.push(r.stage("ramsey_core", 4.0 * t as f64));
    Ok(r)
}

/// Runs [`ramsey_core`] with `t = ⌊α/4⌋`, `q = 2^t` on the decomposed
/// weights `y^p`. Below `α = 32` the exponent is reported but not covered
/// by the guarantee, and the result is flagged heuristic.
pub fn ramsey_phi(wm: &WeightedMetric, alpha: f64) -> Result<ExtractionResult, RamseyError> {
    if !(alpha > 8.0) {
        return Err(RamseyError::AlphaTooSmall { alpha, min: 8.0 });
    }
    let (t, q, p) = phi_parameters(alpha);
    let x = &wm.base;
    let w = wm.weights();
    let dec = decompose_with(w, q, p)?;
    let yp = dec.powered();
    let psi = p * beta_phi(t, q, aspect_ratio(x));
    let tree = shell_tree(x, &yp, t, q);
    let mut r = ExtractionResult::assemble(x, w, tree, psi, t < 8, Vec::new())?;
    r.trace.push(r.stage("ramsey_phi", alpha));
    Ok(r)
}

/// Shell recursion on the support of `w`.
pub(crate) fn shell_tree(x: &FiniteMetric, w: &[f64], t: usize, q: f64) -> HstTree {
    let pts: Vec<usize> = (0..x.n()).filter(|&i| w[i] > 0.0).collect();
    HstTree { k: 1.0, exact: false, root: split(x, w, pts, t, q) }
}

fn split(x: &FiniteMetric, w: &[f64], pts: Vec<usize>, t: usize, q: f64) -> HstNode {
    match pts.len() {
        1 => return HstNode::Leaf(pts[0]),
        2 => {
            return HstNode::Internal {
                delta: x.d(pts[0], pts[1]),
                children: vec![HstNode::Leaf(pts[0]), HstNode::Leaf(pts[1])],
            }
        }
        _ => {}
    }
    let diam = x.diam_of(&pts);
    let (x0, i) = choose_shell(x, w, &pts, diam, t, q);
    let tf = (4 * t) as f64;
    // A = {x0} ∪ B(x0, r(i-1)), B = complement of B(x0, r(i)), r(j) = j·diam/(4t).
    let inside = |y: usize, j: usize| y == x0 || frac_cmp(x.d(x0, y), diam, j as f64, tf) == Ordering::Less;
    let a: Vec<usize> = pts.iter().copied().filter(|&y| inside(y, i - 1)).collect();
    let b: Vec<usize> = pts.iter().copied().filter(|&y| !inside(y, i)).collect();
    if b.is_empty() {
        return split(x, w, a, t, q);
    }
    let mut children = Vec::new();
    for part in [a, b] {
        match split(x, w, part, t, q) {
            HstNode::Internal { delta, children: c } if delta == diam => children.extend(c),
            other => children.push(other),
        }
    }
    HstNode::Internal { delta: diam, children }
}

/// Finds the center and the smallest shell index satisfying the growth
/// condition, falling back to the index with the largest slack.
fn choose_shell(x: &FiniteMetric, w: &[f64], pts: &[usize], diam: f64, t: usize, q: f64) -> (usize, usize) {
    let total: f64 = pts.iter().map(|&i| w[i]).sum();
    let heavy: Vec<usize> = pts.iter().copied().filter(|&i| w[i] * q >= total).collect();
    let light: Vec<usize> = pts.iter().copied().filter(|&i| w[i] * q < total).collect();
    let tf = (4 * t) as f64;
    let ball = |c: usize, j: usize| -> Vec<usize> {
        pts.iter().copied().filter(|&y| y == c || frac_cmp(x.d(c, y), diam, j as f64, tf) == Ordering::Less).collect()
    };
    let mass = |s: &[usize]| s.iter().map(|&i| w[i]).sum::<f64>() / total;

    let far_pair = heavy.iter().enumerate().find_map(|(ia, &a)| {
        heavy[ia + 1..].iter().find(|&&b| 2.0 * x.d(a, b) > diam).map(|&b| (a, b))
    });
    let slack: Vec<f64>;
    let x0;
    if let Some((a, b)) = far_pair {
        let quarter: Vec<usize> = pts.iter().copied().filter(|&y| 4.0 * x.d(a, y) < diam).collect();
        x0 = if 2.0 * mass(&quarter) <= 1.0 { a } else { b };
        let gamma = num::pow(num::log2(q), -1.0 / (t as f64 - 1.0));
        slack = (1..=t).map(|i| num::pow(mass(&ball(x0, i - 1)), gamma) - mass(&ball(x0, i))).collect();
    } else {
        x0 = if heavy.is_empty() {
            pts[0]
        } else {
            let dist = |y: usize| heavy.iter().map(|&h| x.d(y, h)).fold(f64::INFINITY, f64::min);
            let mut best = pts[0];
            for &y in pts {
                if dist(y) > dist(best) {
                    best = y;
                }
            }
            best
        };
        let phi = aspect_ratio(&x.restrict(pts));
        let (b_full, b_half) = (beta_phi(t, q, phi), beta_phi(t, q, phi / 2.0));
        let m = light.len() as f64;
        let eps = |j: usize| ball(x0, j).iter().filter(|&&y| w[y] * q < total).count() as f64 / m;
        slack = (1..=t).map(|i| num::pow(eps(i - 1), b_half) * num::pow(m, b_half - b_full) - eps(i)).collect();
    }
    let i = match slack.iter().position(|&s| s >= 0.0) {
        Some(p) => p + 1,
        None => {
            let mut best = 0;
            for (p, &s) in slack.iter().enumerate() {
                if s > slack[best] {
                    best = p;
                }
            }
            best + 1
        }
    };
    (x0, i)
}
