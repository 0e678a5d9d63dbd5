//! Periodically sparse subtrees and the passage from ultrametrics to exact
//! `k`-HSTs with a weighted size guarantee.

use alloc::vec;
use alloc::vec::Vec;

use super::{exact_k_hst, HstError, HstNode, HstTree};
use crate::metric::{distortion_by, EmbeddingReport};
use crate::num;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseSubtree {
    pub tree: HstTree,
    /// Every kept vertex at a depth congruent to `phase` mod `h` is degenerate.
    pub phase: usize,
    /// `Σ w^{(h-1)/h}` over the kept leaves.
    pub value: f64,
}

/// Which residues of depth mod `period` may branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// All residues but one branch; exponent `(h-1)/h`.
    AllButOne,
    /// A single residue branches; exponent `1/h`.
    SingleResidue,
}

impl Variant {
    fn degenerate(self, residue: usize, phase: usize) -> bool {
        match self {
            Variant::AllButOne => residue == phase,
            Variant::SingleResidue => residue != phase,
        }
    }

    fn exponent(self, period: usize) -> f64 {
        match self {
            Variant::AllButOne => (period - 1) as f64 / period as f64,
            Variant::SingleResidue => 1.0 / period as f64,
        }
    }
}

fn weight_of(weights: &[f64], id: usize) -> Result<f64, HstError> {
    weights.get(id).copied().ok_or(HstError::WeightLengthMismatch { weights: weights.len(), id })
}

/// Optimal value and subtree for one phase: branching vertices keep every
/// child, degenerate ones keep their best child (first on ties).
fn sparse_for_phase(
    u: &HstNode,
    depth: usize,
    period: usize,
    phase: usize,
    variant: Variant,
    weights: &[f64],
    e: f64,
) -> (f64, HstNode) {
    match u {
        HstNode::Leaf(id) => (num::pow(weights[*id], e), HstNode::Leaf(*id)),
        HstNode::Internal { delta, children } => {
            let subs: Vec<(f64, HstNode)> =
                children.iter().map(|c| sparse_for_phase(c, depth + 1, period, phase, variant, weights, e)).collect();
            if variant.degenerate(depth % period, phase) {
                let mut best = 0;
                for (i, s) in subs.iter().enumerate() {
                    if s.0 > subs[best].0 {
                        best = i;
                    }
                }
                let (v, node) = subs.into_iter().nth(best).unwrap();
                (v, HstNode::Internal { delta: *delta, children: vec![node] })
            } else {
                let v = subs.iter().map(|s| s.0).sum();
                (v, HstNode::Internal { delta: *delta, children: subs.into_iter().map(|s| s.1).collect() })
            }
        }
    }
}

fn best_sparse(
    t: &HstTree,
    weights: &[f64],
    period: usize,
    variant: Variant,
) -> Result<SparseSubtree, HstError> {
    for id in t.root.leaves() {
        weight_of(weights, id)?;
    }
    let e = variant.exponent(period);
    // Phases are tried in the order that needs the shortest padding path
    // above the root, so ties favour the least distortion.
    let order: Vec<usize> = match variant {
        Variant::AllButOne => (0..period).rev().collect(),
        Variant::SingleResidue => (0..period).collect(),
    };
    let mut best: Option<SparseSubtree> = None;
    for phase in order {
        let (value, root) = sparse_for_phase(&t.root, 0, period, phase, variant, weights, e);
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(SparseSubtree { tree: HstTree { k: t.k, exact: t.exact, root }, phase, value });
        }
    }
    Ok(best.unwrap())
}

/// The best `h`-periodically sparse subtree for `Σ w^{(h-1)/h}`.
pub fn periodically_sparse_subtree(t: &HstTree, weights: &[f64], h: usize) -> Result<SparseSubtree, HstError> {
    if h < 2 {
        return Err(HstError::InvalidH { h });
    }
    best_sparse(t, weights, h, Variant::AllButOne)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KhstExtraction {
    /// Kept leaf ids, ascending.
    pub subset: Vec<usize>,
    /// Exact `k`-HST on `subset`.
    pub tree: HstTree,
    /// Distortion from the input ultrametric on `subset` onto `tree`.
    pub report: EmbeddingReport,
    /// Exponent of the weighted guarantee.
    pub psi: f64,
    pub period: usize,
    pub s: f64,
    pub variant: Variant,
}

/// Passes from an ultrametric tree to a subset that is `alpha`-equivalent
/// to an exact `k`-HST.
///
/// With `h = ⌈log_{k/α} α⌉ ≥ 2` the tree is made an exact `s`-HST for
/// `s = k^{1/h}`, an `h`-periodically sparse subtree is kept, and levels are
/// collapsed `h` at a time; distortion is below `s^{h-1} ≤ α`. When
/// `k ≥ α²` that exponent degenerates, so instead `h = ⌈log_α k⌉`, `s ≤ α`,
/// and only one residue class of depths is allowed to branch.
pub fn um_to_khst(t: &HstTree, weights: &[f64], k: f64, alpha: f64) -> Result<KhstExtraction, HstError> {
    if !(alpha > 1.0 && k > alpha && k.is_finite()) {
        return Err(HstError::InvalidParameters { k, alpha });
    }
    let h_all = num::guarded_ceil(num::ln(alpha) / num::ln(k / alpha)).max(1.0) as usize;
    let (period, variant) = if h_all >= 2 {
        (h_all, Variant::AllButOne)
    } else {
        (num::guarded_ceil(num::ln(k) / num::ln(alpha)).max(2.0) as usize, Variant::SingleResidue)
    };
    let s = num::exp2(num::log2(k) / period as f64);

    if let HstNode::Leaf(id) = t.root {
        weight_of(weights, id)?;
        return Ok(KhstExtraction {
            subset: vec![id],
            tree: HstTree { k, exact: true, root: HstNode::Leaf(id) },
            report: EmbeddingReport::identity(),
            psi: 1.0,
            period,
            s,
            variant,
        });
    }

    let (exact, _) = exact_k_hst(t, s)?;
    let sparse = best_sparse(&exact, weights, period, variant)?;

    // Shift depths so the collapse keeps the right residue, then keep one
    // level in every `period`.
    let shift = match variant {
        Variant::AllButOne => (period - 1 + period - sparse.phase) % period,
        Variant::SingleResidue => (period - sparse.phase) % period,
    };
    let root = &sparse.tree.root;
    let collapsed = if shift == 0 {
        collapse_root(root, period)
    } else {
        let mut kids = Vec::new();
        collapse(root, shift, period, &mut kids);
        HstNode::Internal { delta: root.delta() * num::pow(s, shift as f64), children: kids }
    };
    let tree = HstTree::new(k, true, collapsed);

    let subset = tree.leaf_ids();
    let (ids0, d0) = t.leaf_distances();
    let n0 = ids0.len();
    let pos: Vec<usize> = subset.iter().map(|id| ids0.binary_search(id).unwrap()).collect();
    let (_, d1) = tree.leaf_distances();
    let m = subset.len();
    let report = distortion_by(m, |i, j| d0[pos[i] * n0 + pos[j]], |i, j| d1[i * m + j]);
    Ok(KhstExtraction { subset, tree, report, psi: variant.exponent(period), period, s, variant })
}

fn collapse_root(u: &HstNode, period: usize) -> HstNode {
    let mut out = Vec::new();
    collapse(u, 0, period, &mut out);
    out.pop().unwrap()
}

/// Appends to `out` the vertices of the subtree at `u` that survive when
/// only depths divisible by `period` are kept; leaves always survive, as if
/// padded by a degenerate chain down to the next kept depth.
fn collapse(u: &HstNode, depth: usize, period: usize, out: &mut Vec<HstNode>) {
    match u {
        HstNode::Leaf(id) => out.push(HstNode::Leaf(*id)),
        HstNode::Internal { delta, children } => {
            if depth % period == 0 {
                let mut kids = Vec::new();
                for c in children {
                    collapse(c, depth + 1, period, &mut kids);
                }
                out.push(HstNode::Internal { delta: *delta, children: kids });
            } else {
                for c in children {
                    collapse(c, depth + 1, period, out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::weighted_condition_certified;
    use crate::metric::Arith;

    fn star(m: usize, delta: f64) -> HstTree {
        HstTree { k: 1.0, exact: false, root: HstNode::Internal { delta, children: (0..m).map(HstNode::Leaf).collect() } }
    }

    fn binary(depth: usize, delta: f64, next: &mut usize) -> HstNode {
        if depth == 0 {
            *next += 1;
            return HstNode::Leaf(*next - 1);
        }
        HstNode::Internal { delta, children: vec![binary(depth - 1, delta / 2.0, next), binary(depth - 1, delta / 2.0, next)] }
    }

    #[test]
    fn single_leaf_is_its_own_subtree() {
        let t = HstTree::leaf(0);
        let s = periodically_sparse_subtree(&t, &[2.0], 2).unwrap();
        assert_eq!(s.tree.root, HstNode::Leaf(0));
        assert_eq!(s.value, num::pow(2.0, 0.5));
    }

    #[test]
    fn star_keeps_every_leaf() {
        // Branching at the root gives 3·1 against 1 for a degenerate root.
        let s = periodically_sparse_subtree(&star(3, 1.0), &[1.0; 3], 2).unwrap();
        assert_eq!(s.phase, 1);
        assert_eq!(s.value, 3.0);
        assert_eq!(s.tree.leaf_ids(), vec![0, 1, 2]);
        assert_eq!(periodically_sparse_subtree(&star(3, 1.0), &[1.0; 3], 1).unwrap_err(), HstError::InvalidH { h: 1 });
    }

    #[test]
    fn binary_depth_two_is_sparse_at_one_level() {
        let t = HstTree { k: 1.0, exact: false, root: binary(2, 4.0, &mut 0) };
        let s = periodically_sparse_subtree(&t, &[1.0; 4], 2).unwrap();
        // Either level may be made degenerate; both keep two leaves.
        assert_eq!(s.value, 2.0);
        assert_eq!(s.tree.leaf_ids().len(), 2);
    }

    #[test]
    fn khst_of_exact_input_is_lossless() {
        let root = HstNode::Internal {
            delta: 64.0,
            children: vec![
                HstNode::Internal { delta: 8.0, children: vec![HstNode::Leaf(0), HstNode::Leaf(1)] },
                HstNode::Internal { delta: 8.0, children: vec![HstNode::Leaf(2), HstNode::Leaf(3), HstNode::Leaf(4)] },
            ],
        };
        let t = HstTree::new(8.0, true, root);
        let r = um_to_khst(&t, &[1.0; 5], 8.0, 4.0).unwrap();
        assert_eq!(r.period, 2);
        assert_eq!(r.subset, vec![0, 1, 2, 3, 4]);
        assert!(r.report.within(1.0, Arith::Float));
        assert!(r.tree.validate().is_ok());
    }

    #[test]
    fn khst_of_star_keeps_all() {
        let r = um_to_khst(&star(5, 3.0), &[1.0; 5], 8.0, 4.0).unwrap();
        assert_eq!(r.subset.len(), 5);
        assert_eq!(r.report.distortion, 1.0);
        let r = um_to_khst(&star(5, 3.0), &[1.0; 5], 64.0, 2.0).unwrap();
        assert_eq!(r.variant, Variant::SingleResidue);
        assert_eq!(r.subset.len(), 5);
    }

    #[test]
    fn khst_parameters_are_checked() {
        assert!(matches!(um_to_khst(&star(2, 1.0), &[1.0; 2], 4.0, 4.0), Err(HstError::InvalidParameters { .. })));
        assert!(matches!(um_to_khst(&star(2, 1.0), &[1.0; 2], 4.0, 1.0), Err(HstError::InvalidParameters { .. })));
    }

    #[test]
    fn khst_on_a_binary_tree_meets_both_bounds() {
        let t = HstTree { k: 1.0, exact: false, root: binary(4, 16.0, &mut 0) };
        let w = [1.0; 16];
        for (k, alpha) in [(8.0, 4.0), (64.0, 2.0), (12.0, 3.0), (100.0, 9.0)] {
            let r = um_to_khst(&t, &w, k, alpha).unwrap();
            assert!(r.tree.validate_with(Arith::Float).is_ok());
            assert!(r.report.within(alpha, Arith::Exact), "k={k} alpha={alpha}: {:?}", r.report);
            assert!(r.report.noncontractive(Arith::Float));
            assert!(weighted_condition_certified(&w, &r.subset, r.psi), "k={k} alpha={alpha}");
        }
    }
}
