//! Metric composition and the re-metrization of spaces close to a `k`-HST.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{HstError, HstNode, HstTree};
use crate::metric::{build_metric, distortion_by, EmbeddingReport, FiniteMetric};
use crate::num::le_tol;

/// `outer` with point `x` replaced by `blocks[x]`, cross distances dilated
/// by `beta * gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositionSpec {
    pub outer: FiniteMetric,
    pub blocks: Vec<FiniteMetric>,
    pub beta: f64,
}

impl CompositionSpec {
    /// `max diam(N_x) / min d_M`.
    pub fn gamma(&self) -> f64 {
        let big = self.blocks.iter().map(|b| b.diam()).fold(0.0, f64::max);
        if self.outer.n() < 2 {
            return 0.0;
        }
        big / self.outer.min_distance()
    }
}

/// Materializes the composition; points are listed block by block and
/// labelled `outer/inner`.
pub fn metric_composition(spec: &CompositionSpec) -> Result<FiniteMetric, HstError> {
    if !(spec.beta >= 0.5) {
        return Err(HstError::InvalidBeta { beta: spec.beta });
    }
    let m = spec.outer.n();
    if spec.blocks.len() != m {
        return Err(crate::metric::MetricError::SizeMismatch { left: m, right: spec.blocks.len() }.into());
    }
    if spec.blocks.iter().all(|b| b.n() == 1) {
        return Err(HstError::DegenerateComposition);
    }
    let scale = spec.beta * spec.gamma();
    let mut owner = Vec::new();
    let mut labels = Vec::new();
    for (x, b) in spec.blocks.iter().enumerate() {
        for u in 0..b.n() {
            owner.push((x, u));
            labels.push(format!("{}/{}", spec.outer.labels()[x], b.labels()[u]));
        }
    }
    let rows: Vec<Vec<f64>> = owner
        .iter()
        .map(|&(x, u)| {
            owner
                .iter()
                .map(|&(y, v)| if x == y { spec.blocks[x].d(u, v) } else { scale * spec.outer.d(x, y) })
                .collect()
        })
        .collect();
    Ok(build_metric(&rows, Some(labels))?)
}

/// A space built by nested composition. Point ids index some ambient metric;
/// the distance between points in different children of a block is the
/// block's outer distance between those children.
#[derive(Clone, Debug, PartialEq)]
pub enum Composition {
    Point(usize),
    Block { outer: FiniteMetric, children: Vec<Composition> },
}

impl Composition {
    /// Point ids in depth-first order.
    pub fn points(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<usize>) {
        match self {
            Composition::Point(id) => out.push(*id),
            Composition::Block { children, .. } => children.iter().for_each(|c| c.collect(out)),
        }
    }

    pub fn diam(&self) -> f64 {
        match self {
            Composition::Point(_) => 0.0,
            Composition::Block { outer, children } => children.iter().map(|c| c.diam()).fold(outer.diam(), f64::max),
        }
    }

    /// Smallest ratio of a block's minimum outer distance to its largest child diameter.
    pub fn separation(&self) -> f64 {
        match self {
            Composition::Point(_) => f64::INFINITY,
            Composition::Block { outer, children } => {
                let big = children.iter().map(|c| c.diam()).fold(0.0, f64::max);
                let here = if big > 0.0 { outer.min_distance() / big } else { f64::INFINITY };
                children.iter().map(|c| c.separation()).fold(here, f64::min)
            }
        }
    }

    /// Largest aspect ratio among the outer metrics.
    pub fn max_block_aspect(&self) -> f64 {
        match self {
            Composition::Point(_) => 1.0,
            Composition::Block { outer, children } => {
                children.iter().map(|c| c.max_block_aspect()).fold(crate::metric::aspect_ratio(outer), f64::max)
            }
        }
    }

    /// Point ids (ascending) and the row-major distance matrix over them.
    pub fn distances(&self) -> (Vec<usize>, Vec<f64>) {
        let mut ids = self.points();
        ids.sort_unstable();
        let pos: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let n = ids.len();
        let mut d = vec![0.0; n * n];
        self.fill(&pos, n, &mut d);
        (ids, d)
    }

    fn fill(&self, pos: &BTreeMap<usize, usize>, n: usize, d: &mut [f64]) {
        if let Composition::Block { outer, children } = self {
            let pts: Vec<Vec<usize>> = children.iter().map(|c| c.points().iter().map(|p| pos[p]).collect()).collect();
            for a in 0..children.len() {
                for b in a + 1..children.len() {
                    for &i in &pts[a] {
                        for &j in &pts[b] {
                            d[i * n + j] = outer.d(a, b);
                            d[j * n + i] = outer.d(a, b);
                        }
                    }
                }
                children[a].fill(pos, n, d);
            }
        }
    }

    pub fn metric(&self) -> FiniteMetric {
        let (ids, d) = self.distances();
        let labels = ids.iter().map(|i| format!("{i}")).collect();
        FiniteMetric::from_trusted(ids.len(), d, Some(labels))
    }
}

/// Re-metrizes the leaves of `t` (points of `x`) as a nested composition:
/// the children of every vertex become an outer space whose distances are
/// the largest cross distances in `x`. Degenerate vertices pass through.
///
/// Requires the map `x -> t` to have distortion at most `alpha` and
/// `t.k >= alpha * beta`; the result is then `(1 + 2/beta)`-equivalent to
/// `x`, has separation at least `beta` and outer aspect ratios at most
/// `alpha`.
pub fn khst_to_composition(
    x: &FiniteMetric,
    t: &HstTree,
    alpha: f64,
    beta: f64,
) -> Result<(Composition, EmbeddingReport), HstError> {
    let pre = t.report_against(x)?;
    if !le_tol(pre.distortion, alpha) {
        return Err(HstError::DistortionPreconditionFailed { distortion: pre.distortion, alpha });
    }
    if !le_tol(alpha * beta, t.k) {
        return Err(HstError::InvalidParameters { k: t.k, alpha: alpha * beta });
    }
    let z = build(x, &t.root);
    let (ids, d) = z.distances();
    let n = ids.len();
    let report = distortion_by(n, |i, j| x.d(ids[i], ids[j]), |i, j| d[i * n + j]);
    Ok((z, report))
}

fn build(x: &FiniteMetric, u: &HstNode) -> Composition {
    match u {
        HstNode::Leaf(id) => Composition::Point(*id),
        HstNode::Internal { children, .. } if children.len() == 1 => build(x, &children[0]),
        HstNode::Internal { children, .. } => {
            let sets: Vec<Vec<usize>> = children.iter().map(|c| c.leaves()).collect();
            let m = children.len();
            let mut d = vec![0.0; m * m];
            for a in 0..m {
                for b in a + 1..m {
                    let mut best: f64 = 0.0;
                    for &p in &sets[a] {
                        for &q in &sets[b] {
                            best = best.max(x.d(p, q));
                        }
                    }
                    d[a * m + b] = best;
                    d[b * m + a] = best;
                }
            }
            Composition::Block {
                outer: FiniteMetric::from_trusted(m, d, None),
                children: children.iter().map(|c| build(x, c)).collect(),
            }
        }
    }
}
