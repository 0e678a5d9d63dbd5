//! Subsets of bounded aspect ratio, unweighted and weighted.

use alloc::vec::Vec;
use core::cmp::Ordering;

use super::sequences::balance_binary;
use super::{ExtractionResult, RamseyError};
use crate::hst::HstTree;
use crate::metric::{aspect_ratio, FiniteMetric, PointSubset, WeightedMetric};
use crate::num::{self, prod_cmp};

/// Greedy maximal `diam/α`-separated sets, descending into the most
/// populated cluster at each level; returns the largest set seen. Its
/// aspect ratio is at most `alpha`.
pub fn equilateral_extract(x: &FiniteMetric, alpha: f64) -> PointSubset {
    let all: Vec<usize> = (0..x.n()).collect();
    PointSubset::new(equilateral_on(x, &all, alpha), x.n()).expect("indices come from x")
}

pub(crate) fn equilateral_on(x: &FiniteMetric, pts: &[usize], alpha: f64) -> Vec<usize> {
    let mut best: Vec<usize> = pts.iter().copied().take(1).collect();
    let mut cur = pts.to_vec();
    while cur.len() > 1 {
        let diam = x.diam_of(&cur);
        let far = |a: usize, b: usize| prod_cmp(alpha, x.d(a, b), diam) != Ordering::Less;
        let mut centers: Vec<usize> = Vec::new();
        for &p in &cur {
            if centers.iter().all(|&c| far(c, p)) {
                centers.push(p);
            }
        }
        if centers.len() > best.len() {
            best = centers.clone();
        }
        let mut next: Vec<usize> = Vec::new();
        for &c in &centers {
            let ball: Vec<usize> = cur.iter().copied().filter(|&y| !far(c, y)).collect();
            if ball.len() > next.len() {
                next = ball;
            }
        }
        if next.len() >= cur.len() {
            break;
        }
        cur = next;
    }
    best.sort_unstable();
    best
}

/// `¼⌈log_{α/2} Φ⌉^{-1}`, or 1 when `Φ ≤ α`.
pub fn equilateral_psi(phi: f64, alpha: f64) -> f64 {
    if phi <= alpha {
        return 1.0;
    }
    let levels = num::guarded_ceil(num::ln(phi) / num::ln(alpha / 2.0)).max(1.0);
    0.25 / levels
}

/// A star on a subset of aspect ratio at most `alpha`, chosen so that the
/// weighted condition holds with [`equilateral_psi`]. The star is a
/// `k`-HST for every `k`.
pub fn weighted_equilateral_extract(wm: &WeightedMetric, alpha: f64) -> Result<ExtractionResult, RamseyError> {
    if !(alpha > 2.0) {
        return Err(RamseyError::AlphaTooSmall { alpha, min: 2.0 });
    }
    let x = &wm.base;
    let w = wm.weights();
    let phi = aspect_ratio(x);
    let all: Vec<usize> = (0..x.n()).collect();
    let (chosen, psi) = if x.n() == 1 || phi <= alpha {
        (all, 1.0)
    } else {
        let y = balance_binary(w)?;
        let support: Vec<usize> = (0..x.n()).filter(|&i| y[i] > 0.0).collect();
        // More than two survivors form a level set; the greedy pass keeps at least two of them.
        let chosen = if support.len() <= 2 { support } else { equilateral_on(x, &support, alpha) };
        (chosen, equilateral_psi(phi, alpha))
    };
    let tree = HstTree { k: f64::INFINITY, ..HstTree::star(&chosen, x.diam_of(&chosen)) };
    let mut r = ExtractionResult::assemble(x, w, tree, psi, false, Vec::new())?;
    r.trace.push(r.stage("weighted_equilateral", alpha));
    Ok(r)
}
