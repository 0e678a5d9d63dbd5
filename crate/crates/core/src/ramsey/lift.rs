//! Lifting an extractor through a nested composition.

use alloc::vec::Vec;

use super::equilateral::weighted_equilateral_extract;
use super::shell::{ramsey_core, ramsey_phi};
use super::{ExtractionResult, RamseyError};
use crate::hst::{Composition, HstNode, HstTree};
use crate::metric::{FiniteMetric, WeightedMetric};

/// A weighted extractor whose trees are noncontractive with root label at
/// most the diameter of the extracted set.
pub trait Extractor {
    /// Distortion bound the extractor claims.
    fn alpha(&self) -> f64;
    fn extract(&self, wm: &WeightedMetric) -> Result<ExtractionResult, RamseyError>;
}

pub struct RamseyCore {
    pub t: usize,
    pub q: f64,
}

impl Extractor for RamseyCore {
    fn alpha(&self) -> f64 {
        4.0 * self.t as f64
    }

    fn extract(&self, wm: &WeightedMetric) -> Result<ExtractionResult, RamseyError> {
        ramsey_core(wm, self.t, self.q)
    }
}

pub struct RamseyPhi {
    pub alpha: f64,
}

impl Extractor for RamseyPhi {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn extract(&self, wm: &WeightedMetric) -> Result<ExtractionResult, RamseyError> {
        ramsey_phi(wm, self.alpha)
    }
}

pub struct WeightedEquilateral {
    pub alpha: f64,
}

impl Extractor for WeightedEquilateral {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn extract(&self, wm: &WeightedMetric) -> Result<ExtractionResult, RamseyError> {
        weighted_equilateral_extract(wm, self.alpha)
    }
}

/// Runs `ext` on every outer space of `z` with block weights `Σ w`, then
/// glues the chosen blocks' trees under the outer tree's leaves.
///
/// Each block must be separated by at least `k` times the distortion the
/// extractor actually achieved on its outer space; the glued tree is then
/// a `k`-HST whenever the extractor's trees are. The result is measured
/// against `x`, whose indices the points of `z` are. The recorded exponent
/// is the smallest one among the outer extractions.
pub fn composition_lift(
    ext: &dyn Extractor,
    z: &Composition,
    x: &FiniteMetric,
    weights: &[f64],
    k: f64,
) -> Result<ExtractionResult, RamseyError> {
    let mut psi: f64 = 1.0;
    let mut heuristic = false;
    let root = lift(ext, z, weights, k, &mut psi, &mut heuristic)?;
    let tree = HstTree { k, exact: false, root }.compressed();
    let mut r = ExtractionResult::assemble(x, weights, tree, psi, heuristic, Vec::new())?;
    r.trace.push(r.stage("composition_lift", ext.alpha()));
    Ok(r)
}

fn lift(
    ext: &dyn Extractor,
    z: &Composition,
    weights: &[f64],
    k: f64,
    psi: &mut f64,
    heuristic: &mut bool,
) -> Result<HstNode, RamseyError> {
    let (outer, children) = match z {
        Composition::Point(id) => return Ok(HstNode::Leaf(*id)),
        Composition::Block { outer, children } => (outer, children),
    };
    let mass: Vec<f64> = children.iter().map(|c| c.points().iter().map(|&p| weights[p]).sum()).collect();
    let live: Vec<usize> = (0..children.len()).filter(|&c| mass[c] > 0.0).collect();
    if live.is_empty() {
        // No weight anywhere below: any single point is as good as another.
        return Ok(HstNode::Leaf(z.points()[0]));
    }
    let wm = WeightedMetric::new(outer.restrict(&live), live.iter().map(|&c| mass[c]).collect())?;
    let r = ext.extract(&wm)?;
    *psi = psi.min(r.psi);
    *heuristic |= r.heuristic;
    let big = r.subset.indices().iter().map(|&i| children[live[i]].diam()).fold(0.0, f64::max);
    if big > 0.0 && r.len() > 1 {
        let separation = wm.base.restrict(r.subset.indices()).min_distance() / big;
        let required = k * r.report.distortion;
        if separation < required {
            return Err(RamseyError::SeparationTooSmall { separation, required });
        }
    }
    let mut lifted: Vec<Option<HstNode>> = (0..live.len()).map(|_| None).collect();
    for &i in r.subset.indices() {
        lifted[i] = Some(lift(ext, &children[live[i]], weights, k, psi, heuristic)?);
    }
    Ok(graft(r.tree.root, &mut lifted))
}

fn graft(u: HstNode, lifted: &mut [Option<HstNode>]) -> HstNode {
    match u {
        HstNode::Leaf(i) => lifted[i].take().expect("each outer leaf is lifted once"),
        HstNode::Internal { delta, children } => {
            HstNode::Internal { delta, children: children.into_iter().map(|c| graft(c, lifted)).collect() }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::exact::weighted_condition_certified;
    use crate::metric::{build_metric, Arith};

    fn equilateral(n: usize, d: f64) -> FiniteMetric {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { d }).collect()).collect();
        build_metric(&rows, None).unwrap()
    }

    fn two_blocks(beta: f64) -> (Composition, FiniteMetric) {
        let z = Composition::Block {
            outer: equilateral(2, 2.0 * beta),
            children: (0..2)
                .map(|b| Composition::Block {
                    outer: equilateral(2, 2.0),
                    children: vec![Composition::Point(2 * b), Composition::Point(2 * b + 1)],
                })
                .collect(),
        };
        let x = z.metric();
        (z, x)
    }

    #[test]
    fn equilateral_blocks_lift_fully() {
        let (z, x) = two_blocks(4.0);
        let r = composition_lift(&WeightedEquilateral { alpha: 3.0 }, &z, &x, &[1.0; 4], 4.0).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r.report.distortion, 1.0);
        r.tree.validate().unwrap();
    }

    #[test]
    fn core_extractor_on_two_blocks() {
        let (z, x) = two_blocks(8.0);
        let w = [1.0, 2.0, 3.0, 4.0];
        let r = composition_lift(&RamseyCore { t: 8, q: 256.0 }, &z, &x, &w, 1.0).unwrap();
        r.tree.validate().unwrap();
        assert!(r.report.within(32.0, Arith::Exact));
        assert!(weighted_condition_certified(&w, r.subset.indices(), r.psi));
    }

    #[test]
    fn single_block_matches_the_extractor() {
        let x = build_metric(&[vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 2.5], vec![3.0, 2.5, 0.0]], None).unwrap();
        let z = Composition::Block { outer: x.clone(), children: (0..3).map(Composition::Point).collect() };
        let ext = WeightedEquilateral { alpha: 2.5 };
        let lifted = composition_lift(&ext, &z, &x, &[1.0; 3], 1.0).unwrap();
        let direct = ext.extract(&WeightedMetric::uniform(x.clone())).unwrap();
        assert_eq!(lifted.subset, direct.subset);
        assert_eq!(lifted.psi, direct.psi);
    }

    #[test]
    fn separation_is_enforced() {
        let (z, x) = two_blocks(0.6);
        let err = composition_lift(&WeightedEquilateral { alpha: 3.0 }, &z, &x, &[1.0; 4], 4.0).unwrap_err();
        assert!(matches!(err, RamseyError::SeparationTooSmall { .. }));
    }
}
