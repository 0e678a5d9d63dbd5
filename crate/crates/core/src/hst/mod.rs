//! Hierarchically well-separated trees and the surgery performed on them.
//!
//! A tree's leaves carry point ids (distinct, not necessarily contiguous);
//! the metric a tree defines is indexed by its leaf ids in ascending order.

mod compose;
mod sparse;

pub use compose::{khst_to_composition, metric_composition, Composition, CompositionSpec};
pub use sparse::{periodically_sparse_subtree, um_to_khst, KhstExtraction, SparseSubtree, Variant};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::metric::{distortion_by, minimum_spanning_edges, Arith, EmbeddingReport, FiniteMetric, MetricError};
use crate::num::{self, le_tol, prod_cmp};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HstError {
    #[error("LabelMonotonicityViolation: child label {child} exceeds parent label {parent} / k")]
    LabelMonotonicityViolation { parent: f64, child: f64 },
    #[error("DegenerateVertex: internal vertex with label {delta} has a single child")]
    DegenerateVertex { delta: f64 },
    #[error("InvalidLabel: internal label {delta} is not positive and finite")]
    InvalidLabel { delta: f64 },
    #[error("EmptyVertex: internal vertex without children")]
    EmptyVertex,
    #[error("DuplicateLeaf: leaf id {id} appears twice")]
    DuplicateLeaf { id: usize },
    #[error("InvalidK: k = {k} must exceed 1")]
    InvalidK { k: f64 },
    #[error("InvalidH: h = {h} must exceed 1")]
    InvalidH { h: usize },
    #[error("InvalidParameters: need k > alpha > 1, got k = {k}, alpha = {alpha}")]
    InvalidParameters { k: f64, alpha: f64 },
    #[error("DistortionPreconditionFailed: measured distortion {distortion} exceeds {alpha}")]
    DistortionPreconditionFailed { distortion: f64, alpha: f64 },
    #[error("InvalidBeta: beta = {beta} is below 1/2")]
    InvalidBeta { beta: f64 },
    #[error("DegenerateComposition: every block is a single point")]
    DegenerateComposition,
    #[error("LeafOutOfRange: leaf id {id} has no point in a space of {n} points")]
    LeafOutOfRange { id: usize, n: usize },
    #[error("WeightLengthMismatch: {weights} weights do not cover leaf id {id}")]
    WeightLengthMismatch { weights: usize, id: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum HstNode {
    Leaf(usize),
    Internal { delta: f64, children: Vec<HstNode> },
}

impl HstNode {
    pub fn delta(&self) -> f64 {
        match self {
            HstNode::Leaf(_) => 0.0,
            HstNode::Internal { delta, .. } => *delta,
        }
    }

    pub fn children(&self) -> &[HstNode] {
        match self {
            HstNode::Leaf(_) => &[],
            HstNode::Internal { children, .. } => children,
        }
    }

    /// Leaf ids in depth-first order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            HstNode::Leaf(id) => out.push(*id),
            HstNode::Internal { children, .. } => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    fn scale(&mut self, c: f64) {
        if let HstNode::Internal { delta, children } = self {
            *delta *= c;
            children.iter_mut().for_each(|ch| ch.scale(c));
        }
    }

    fn relabel(&mut self, delta_here: f64, k: f64) {
        if let HstNode::Internal { delta, children } = self {
            *delta = delta_here;
            for ch in children {
                ch.relabel(delta_here / k, k);
            }
        }
    }

    /// Splices out single-child internal vertices.
    fn compress(self) -> HstNode {
        match self {
            HstNode::Leaf(_) => self,
            HstNode::Internal { delta, children } => {
                if children.len() == 1 {
                    children.into_iter().next().unwrap().compress()
                } else {
                    HstNode::Internal { delta, children: children.into_iter().map(HstNode::compress).collect() }
                }
            }
        }
    }

    fn depth(&self) -> usize {
        self.children().iter().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HstTree {
    /// Claimed separation: every internal child label is at most its parent's over `k`.
    pub k: f64,
    /// Exact trees have `Δ(child) = Δ(parent)/k` and may contain degenerate vertices.
    pub exact: bool,
    pub root: HstNode,
}

impl HstTree {
    pub fn new(k: f64, exact: bool, root: HstNode) -> Self {
        let mut t = HstTree { k, exact, root };
        if exact {
            t.normalize_exact();
        }
        t
    }

    pub fn leaf(id: usize) -> Self {
        HstTree { k: 1.0, exact: true, root: HstNode::Leaf(id) }
    }

    /// Star with all points at mutual distance `delta`.
    pub fn star(ids: &[usize], delta: f64) -> Self {
        if ids.len() == 1 {
            return HstTree::leaf(ids[0]);
        }
        HstTree { k: 1.0, exact: true, root: HstNode::Internal { delta, children: ids.iter().map(|&i| HstNode::Leaf(i)).collect() } }
    }

    /// Leaf ids in ascending order.
    pub fn leaf_ids(&self) -> Vec<usize> {
        let mut ids = self.root.leaves();
        ids.sort_unstable();
        ids
    }

    pub fn len(&self) -> usize {
        self.root.leaves().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn diam(&self) -> f64 {
        self.root.delta()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Recomputes every label as `Δ(root)/k^depth`.
    pub fn normalize_exact(&mut self) {
        let d = self.root.delta();
        let k = self.k;
        self.root.relabel(d, k);
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.root.scale(c);
        self
    }

    /// Removes degenerate vertices; the result is no longer flagged exact.
    pub fn compressed(self) -> Self {
        HstTree { k: self.k, exact: false, root: self.root.compress() }
    }

    /// Smallest ratio `Δ(parent)/Δ(child)` over internal edges.
    pub fn separation(&self) -> f64 {
        fn walk(u: &HstNode, best: &mut f64) {
            if let HstNode::Internal { delta, children } = u {
                for c in children {
                    if let HstNode::Internal { delta: dc, .. } = c {
                        *best = best.min(delta / dc);
                    }
                    walk(c, best);
                }
            }
        }
        let mut best = f64::INFINITY;
        walk(&self.root, &mut best);
        best
    }

    pub fn validate(&self) -> Result<(), HstError> {
        self.validate_with(Arith::Float)
    }

    pub fn validate_with(&self, arith: Arith) -> Result<(), HstError> {
        let mut seen = BTreeMap::new();
        self.check(&self.root, arith, &mut seen)
    }

    fn check(&self, u: &HstNode, arith: Arith, seen: &mut BTreeMap<usize, ()>) -> Result<(), HstError> {
        match u {
            HstNode::Leaf(id) => {
                if seen.insert(*id, ()).is_some() {
                    return Err(HstError::DuplicateLeaf { id: *id });
                }
            }
            HstNode::Internal { delta, children } => {
                if !(delta.is_finite() && *delta > 0.0) {
                    return Err(HstError::InvalidLabel { delta: *delta });
                }
                if children.is_empty() {
                    return Err(HstError::EmptyVertex);
                }
                if children.len() == 1 && !self.exact {
                    return Err(HstError::DegenerateVertex { delta: *delta });
                }
                for c in children {
                    if let HstNode::Internal { delta: dc, .. } = c {
                        let ok = match arith {
                            Arith::Float => le_tol(dc * self.k, *delta),
                            Arith::Exact => prod_cmp(*dc, self.k, *delta) != Ordering::Greater,
                        };
                        if !ok {
                            return Err(HstError::LabelMonotonicityViolation { parent: *delta, child: *dc });
                        }
                    }
                    self.check(c, arith, seen)?;
                }
            }
        }
        Ok(())
    }

    /// Leaf ids (ascending) and the row-major matrix of `Δ(lca)` over them.
    pub fn leaf_distances(&self) -> (Vec<usize>, Vec<f64>) {
        let ids = self.leaf_ids();
        let pos: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let n = ids.len();
        let mut d = vec![0.0; n * n];
        fn walk(u: &HstNode, pos: &BTreeMap<usize, usize>, n: usize, d: &mut [f64]) -> Vec<usize> {
            match u {
                HstNode::Leaf(id) => vec![pos[id]],
                HstNode::Internal { delta, children } => {
                    let mut acc: Vec<usize> = Vec::new();
                    for c in children {
                        let sub = walk(c, pos, n, d);
                        for &a in &acc {
                            for &b in &sub {
                                d[a * n + b] = *delta;
                                d[b * n + a] = *delta;
                            }
                        }
                        acc.extend(sub);
                    }
                    acc
                }
            }
        }
        walk(&self.root, &pos, n, &mut d);
        (ids, d)
    }

    /// Distortion of the map from `x` (restricted to the leaf ids) onto the tree.
    pub fn report_against(&self, x: &FiniteMetric) -> Result<EmbeddingReport, HstError> {
        let (ids, d) = self.leaf_distances();
        if let Some(&id) = ids.iter().find(|&&i| i >= x.n()) {
            return Err(HstError::LeafOutOfRange { id, n: x.n() });
        }
        let n = ids.len();
        Ok(distortion_by(n, |i, j| x.d(ids[i], ids[j]), |i, j| d[i * n + j]))
    }
}

/// The ultrametric defined by `t`, after validating it against its declared `k`.
pub fn hst_metric(t: &HstTree) -> Result<FiniteMetric, HstError> {
    t.validate()?;
    let (ids, d) = t.leaf_distances();
    let labels = ids.iter().map(|i| format!("{i}")).collect();
    Ok(FiniteMetric::from_trusted(ids.len(), d, Some(labels)))
}

/// Rebuilds an ultrametric tree as an exact `k`-HST by rounding each label
/// up to the next power of `k` below its parent, inserting chain vertices
/// where labels skip powers.
pub fn exact_k_hst(t: &HstTree, k: f64) -> Result<(HstTree, EmbeddingReport), HstError> {
    if !(k > 1.0 && k.is_finite()) {
        return Err(HstError::InvalidK { k });
    }
    HstTree { k: 1.0, exact: true, root: t.root.clone() }.validate()?;
    let root = match &t.root {
        HstNode::Leaf(id) => HstNode::Leaf(*id),
        HstNode::Internal { delta, children } => rebuild(*delta, children, k),
    };
    let out = HstTree::new(k, true, root);
    let (_, before) = t.leaf_distances();
    let (_, after) = out.leaf_distances();
    let n = t.len();
    let report = distortion_by(n, |i, j| before[i * n + j], |i, j| after[i * n + j]);
    Ok((out, report))
}

fn rebuild(label: f64, children: &[HstNode], k: f64) -> HstNode {
    let mut out = Vec::new();
    let mut work: Vec<&HstNode> = children.iter().rev().collect();
    while let Some(c) = work.pop() {
        match c {
            HstNode::Leaf(id) => out.push(HstNode::Leaf(*id)),
            HstNode::Internal { delta, children: gc } => {
                let i = num::floor(num::ln(label / delta) / num::ln(k) + 1e-12).max(0.0) as i32;
                if i == 0 {
                    work.extend(gc.iter().rev());
                } else {
                    let mut node = rebuild(label / num::pow(k, i as f64), gc, k);
                    for j in (1..i).rev() {
                        node = HstNode::Internal { delta: label / num::pow(k, j as f64), children: vec![node] };
                    }
                    out.push(node);
                }
            }
        }
    }
    HstNode::Internal { delta: label, children: out }
}

/// Coordinates realizing the tree metric isometrically in Euclidean space,
/// one row per leaf in ascending id order.
///
/// Each non-root vertex `c` with parent `p` owns an axis with weight
/// `sqrt((Δ(p)² - Δ(c)²)/2)`; a leaf sits at the sum of the weighted axes on
/// its root path, so the squared distance of two leaves telescopes to
/// `Δ(lca)²`.
pub fn embed_l2(t: &HstTree) -> (Vec<usize>, Vec<Vec<f64>>) {
    fn count(u: &HstNode) -> usize {
        u.children().iter().map(|c| 1 + count(c)).sum()
    }
    let dim = count(&t.root);
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut next = 0usize;
    fn walk(u: &HstNode, path: &mut Vec<(usize, f64)>, next: &mut usize, dim: usize, rows: &mut BTreeMap<usize, Vec<f64>>) {
        match u {
            HstNode::Leaf(id) => {
                let mut v = vec![0.0; dim];
                for &(axis, a) in path.iter() {
                    v[axis] = a;
                }
                rows.insert(*id, v);
            }
            HstNode::Internal { delta, children } => {
                for c in children {
                    let dc = c.delta();
                    let a = num::sqrt(((delta - dc) * (delta + dc) / 2.0).max(0.0));
                    path.push((*next, a));
                    *next += 1;
                    walk(c, path, next, dim, rows);
                    path.pop();
                }
            }
        }
    }
    walk(&t.root, &mut Vec::new(), &mut next, dim, &mut rows);
    rows.into_iter().unzip()
}

/// Single-linkage dendrogram: the tree of the subdominant ultrametric.
/// Merges at equal heights share one vertex, so the tree is nondegenerate.
pub fn single_linkage_tree(x: &FiniteMetric) -> HstTree {
    let n = x.n();
    if n == 1 {
        return HstTree::leaf(0);
    }
    let mut nodes: Vec<Option<HstNode>> = (0..n).map(|i| Some(HstNode::Leaf(i))).collect();
    let mut owner: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut last = 0;
    for (h, a, b) in minimum_spanning_edges(x) {
        let (ra, rb) = (owner[a], owner[b]);
        let na = nodes[ra].take().unwrap();
        let nb = nodes[rb].take().unwrap();
        let mut children = Vec::new();
        for node in [na, nb] {
            match node {
                HstNode::Internal { delta, children: c } if delta == h => children.extend(c),
                other => children.push(other),
            }
        }
        nodes[ra] = Some(HstNode::Internal { delta: h, children });
        let moved = core::mem::take(&mut members[rb]);
        for &q in &moved {
            owner[q] = ra;
        }
        members[ra].extend(moved);
        last = ra;
    }
    HstTree { k: 1.0, exact: false, root: nodes[last].take().unwrap() }
}

/// An `n`-equivalent ultrametric: each cluster `S` becomes a vertex with
/// label `diam(S)` whose children are the components left after deleting
/// the longest minimum-spanning-tree edges of `S`. Those components are
/// pairwise at distance at least that edge length, which is itself at
/// least `diam(S)/(|S|-1)`, so the map is noncontractive and expands by at
/// most `n - 1`.
pub fn naive_ultrametric(x: &FiniteMetric) -> (HstTree, Vec<usize>, EmbeddingReport) {
    let pts: Vec<usize> = (0..x.n()).collect();
    let root = split_cluster(x, &pts);
    let t = HstTree { k: 1.0, exact: false, root };
    let report = t.report_against(x).expect("leaves are the points of x");
    (t, pts, report)
}

fn split_cluster(x: &FiniteMetric, pts: &[usize]) -> HstNode {
    if pts.len() == 1 {
        return HstNode::Leaf(pts[0]);
    }
    let sub = x.restrict(pts);
    let edges = minimum_spanning_edges(&sub);
    let tau = edges.last().map(|e| e.0).unwrap_or(0.0);
    let m = pts.len();
    let mut comp: Vec<usize> = (0..m).collect();
    fn find(c: &mut [usize], mut a: usize) -> usize {
        while c[a] != a {
            c[a] = c[c[a]];
            a = c[a];
        }
        a
    }
    for &(len, a, b) in &edges {
        if len < tau {
            let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
            comp[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..m {
        let r = find(&mut comp, i);
        groups.entry(r).or_default().push(pts[i]);
    }
    let children = groups.into_values().map(|g| split_cluster(x, &g)).collect();
    HstNode::Internal { delta: sub.diam(), children }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_metric, distortion};

    pub(crate) fn abc_tree() -> HstTree {
        // root 4 over {a, (b, c) at 2}
        HstTree {
            k: 1.0,
            exact: false,
            root: HstNode::Internal {
                delta: 4.0,
                children: vec![
                    HstNode::Leaf(0),
                    HstNode::Internal { delta: 2.0, children: vec![HstNode::Leaf(1), HstNode::Leaf(2)] },
                ],
            },
        }
    }

    fn line(xs: &[f64]) -> FiniteMetric {
        let rows: Vec<Vec<f64>> = xs.iter().map(|a| xs.iter().map(|b| num::abs(a - b)).collect()).collect();
        build_metric(&rows, None).unwrap()
    }

    #[test]
    fn metric_of_small_trees() {
        let t = HstTree::star(&[0, 1], 2.0);
        assert_eq!(hst_metric(&t).unwrap().to_rows(), vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        let m = hst_metric(&abc_tree()).unwrap();
        assert_eq!((m.d(0, 1), m.d(0, 2), m.d(1, 2)), (4.0, 4.0, 2.0));
        let t3 = HstTree { k: 3.0, ..abc_tree() };
        assert_eq!(hst_metric(&t3), Err(HstError::LabelMonotonicityViolation { parent: 4.0, child: 2.0 }));
        let t2 = HstTree { k: 2.0, ..abc_tree() };
        assert!(hst_metric(&t2).is_ok());
    }

    #[test]
    fn degenerate_vertices_need_the_exact_flag() {
        let root = HstNode::Internal {
            delta: 4.0,
            children: vec![HstNode::Internal { delta: 2.0, children: vec![HstNode::Leaf(0), HstNode::Leaf(1)] }],
        };
        let t = HstTree { k: 2.0, exact: false, root: root.clone() };
        assert_eq!(hst_metric(&t), Err(HstError::DegenerateVertex { delta: 4.0 }));
        assert!(hst_metric(&HstTree { k: 2.0, exact: true, root }).is_ok());
    }

    #[test]
    fn exact_relabel_rounds_to_powers() {
        // 8 over {leaf, 3 over two leaves}: 3 becomes 4 with k = 2.
        let t = HstTree {
            k: 1.0,
            exact: false,
            root: HstNode::Internal {
                delta: 8.0,
                children: vec![
                    HstNode::Leaf(0),
                    HstNode::Internal { delta: 3.0, children: vec![HstNode::Leaf(1), HstNode::Leaf(2)] },
                ],
            },
        };
        let (e, r) = exact_k_hst(&t, 2.0).unwrap();
        assert_eq!(e.root.children()[1].delta(), 4.0);
        assert_eq!(r.distortion, 4.0 / 3.0);
        assert!(e.validate_with(Arith::Exact).is_ok());

        // 8 over {leaf, 1 over two leaves}: chain 4, 2 then 1, no distortion.
        let t = HstTree {
            k: 1.0,
            exact: false,
            root: HstNode::Internal {
                delta: 8.0,
                children: vec![
                    HstNode::Leaf(0),
                    HstNode::Internal { delta: 1.0, children: vec![HstNode::Leaf(1), HstNode::Leaf(2)] },
                ],
            },
        };
        let (e, r) = exact_k_hst(&t, 2.0).unwrap();
        let mut labels = Vec::new();
        let mut u = &e.root.children()[1];
        while let HstNode::Internal { delta, children } = u {
            labels.push(*delta);
            u = &children[0];
        }
        assert_eq!(labels, vec![4.0, 2.0, 1.0]);
        assert_eq!(r.distortion, 1.0);
        assert_eq!(exact_k_hst(&t, 1.0).unwrap_err(), HstError::InvalidK { k: 1.0 });
    }

    #[test]
    fn exact_input_is_unchanged() {
        let t = HstTree::new(
            2.0,
            true,
            HstNode::Internal {
                delta: 8.0,
                children: vec![
                    HstNode::Internal { delta: 4.0, children: vec![HstNode::Leaf(0), HstNode::Leaf(1)] },
                    HstNode::Leaf(2),
                ],
            },
        );
        let (e, r) = exact_k_hst(&t, 2.0).unwrap();
        assert_eq!(e.root, t.root);
        assert_eq!(r.distortion, 1.0);
    }

    #[test]
    fn l2_coordinates_reproduce_tree_distances() {
        let t = abc_tree();
        let (ids, rows) = embed_l2(&t);
        assert_eq!(ids, vec![0, 1, 2]);
        let dist = |a: &[f64], b: &[f64]| num::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum());
        assert!((dist(&rows[0], &rows[1]) - 4.0).abs() < 1e-12);
        assert!((dist(&rows[0], &rows[2]) - 4.0).abs() < 1e-12);
        assert!((dist(&rows[1], &rows[2]) - 2.0).abs() < 1e-12);
        let (_, tri) = embed_l2(&HstTree::star(&[0, 1, 2], 2.0));
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((dist(&tri[i], &tri[j]) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_linkage_matches_subdominant() {
        let x = line(&[0.0, 1.0, 3.0, 7.0]);
        let t = single_linkage_tree(&x);
        let (u, _) = crate::metric::subdominant_ultrametric(&x);
        assert_eq!(hst_metric(&t).unwrap().raw(), u.raw());
    }

    #[test]
    fn naive_ultrametric_cases() {
        let (t, _, r) = naive_ultrametric(&line(&[0.0, 1.0, 2.0]));
        assert_eq!(t, HstTree::star(&[0, 1, 2], 2.0).compressed());
        assert_eq!(r.distortion, 2.0);
        assert!(r.noncontractive(Arith::Exact));

        let um = hst_metric(&abc_tree()).unwrap();
        let (t, _, r) = naive_ultrametric(&um);
        assert_eq!(r.distortion, 1.0);
        assert_eq!(hst_metric(&t).unwrap().raw(), um.raw());

        let eq = build_metric(&[vec![0.0, 5.0, 5.0], vec![5.0, 0.0, 5.0], vec![5.0, 5.0, 0.0]], None).unwrap();
        let (t, _, r) = naive_ultrametric(&eq);
        assert_eq!(t.root.children().len(), 3);
        assert_eq!(r.distortion, 1.0);
    }

    #[test]
    fn report_orientation() {
        let x = line(&[0.0, 1.0, 2.0]);
        let t = HstTree::star(&[0, 1, 2], 2.0);
        let r = t.report_against(&x).unwrap();
        let direct = distortion(&x, &hst_metric(&t.clone().compressed()).unwrap(), &[0, 1, 2]).unwrap();
        assert_eq!(r, direct);
        assert_eq!(r.expansion, 2.0);
        assert_eq!(r.contraction, 1.0);
    }
}
