//! Distortion refinement and the top-level extraction driver.

use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::equilateral::{equilateral_on, weighted_equilateral_extract};
use super::lift::{composition_lift, Extractor, RamseyPhi, WeightedEquilateral};
use super::shell::ramsey_phi;
use super::{ExtractionResult, RamseyError, Stage};
use crate::hst::{khst_to_composition, naive_ultrametric, single_linkage_tree, um_to_khst, HstError, HstNode, HstTree};
use crate::metric::{
    aspect_ratio, exact_ramsey_oracle, Arith, FiniteMetric, Target, WeightedMetric, ORACLE_CAP,
};
use crate::num::{self, le_tol};

/// Default for the constant of the small-distortion pipeline; see the
/// calibration notes in the README.
pub const DEFAULT_THETA: f64 = 32.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriverOptions {
    /// Distortion at which the small-distortion pipeline starts is `theta/2`.
    pub theta: f64,
    /// Arithmetic used when filtering candidates by distortion.
    pub arith: Arith,
    /// Largest input handed to the exhaustive fallback.
    pub oracle_cap: usize,
}

impl Default for DriverOptions {
    fn default() -> Self {
        DriverOptions { theta: DEFAULT_THETA, arith: Arith::Float, oracle_cap: ORACLE_CAP }
    }
}

/// Halves the distortion of `r` (at most `alpha > 8`): `r`'s tree is made
/// close to a `Φβ`-HST with `Φ = 2^{min(2α, 900)}` and `β = α/2 - 2`, the
/// points are re-metrized as a composition with separation `β`, and an
/// extractor at distortion `β` is lifted through it. The output is
/// verified to have distortion at most `α/2` against `x`.
pub fn refine(x: &FiniteMetric, weights: &[f64], r: &ExtractionResult, alpha: f64) -> Result<ExtractionResult, RamseyError> {
    if !(alpha > 8.0) {
        return Err(RamseyError::AlphaTooSmall { alpha, min: 8.0 });
    }
    if !le_tol(r.report.distortion, alpha) {
        return Err(RamseyError::VerificationFailed {
            stage: "refine input".to_string(),
            distortion: r.report.distortion,
            bound: alpha,
        });
    }
    let beta = alpha / 2.0 - 2.0;
    let phi = num::exp2((2.0 * alpha).min(900.0));
    let k = phi * beta;
    let wr = powered(weights, r.psi);
    let kh = um_to_khst(&r.tree, &wr, k, phi / alpha)?;
    let (z, _) = khst_to_composition(x, &kh.tree, phi, beta)?;
    let inner: Box<dyn Extractor> =
        if beta > 8.0 { Box::new(RamseyPhi { alpha: beta }) } else { Box::new(WeightedEquilateral { alpha: beta }) };
    let lifted = composition_lift(inner.as_ref(), &z, x, &powered(weights, r.psi * kh.psi), 1.0)?;
    let psi = r.psi * kh.psi * lifted.psi;
    let mut trace = r.trace.clone();
    trace.push(Stage {
        op: "um_to_khst".to_string(),
        alpha: phi / alpha,
        size: kh.subset.len(),
        distortion: kh.report.distortion,
        psi: kh.psi,
    });
    trace.extend(lifted.trace.iter().cloned());
    let mut out = ExtractionResult::assemble(x, weights, lifted.tree, psi, r.heuristic || lifted.heuristic, trace)?;
    if !out.report.within(alpha / 2.0, Arith::Float) {
        return Err(RamseyError::VerificationFailed {
            stage: "refine".to_string(),
            distortion: out.report.distortion,
            bound: alpha / 2.0,
        });
    }
    out.trace.push(out.stage("refine", alpha / 2.0));
    Ok(out)
}

/// An extraction at distortion `2 + ε` into a `k`-HST: a large-distortion
/// extraction at `θ/2`, reduction to an exact `θβ`-HST up to factor 2 with
/// `β = 8k/ε`, re-metrization as a composition, and weighted equilateral
/// extraction at `2 + ε/4` lifted through it.
pub fn small_alpha_extract(
    x: &FiniteMetric,
    weights: Option<&[f64]>,
    epsilon: f64,
    k: f64,
    opts: &DriverOptions,
) -> Result<ExtractionResult, RamseyError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(RamseyError::InvalidEpsilon { epsilon });
    }
    if !(k >= 1.0 && k.is_finite()) {
        return Err(HstError::InvalidK { k }.into());
    }
    let wm = weighted(x, weights)?;
    if x.n() == 1 {
        return trivial(&wm);
    }
    let start = large_stage(&wm, opts)?;
    small_alpha_from(&wm, &start, epsilon, k, opts.theta)
}

fn small_alpha_from(
    wm: &WeightedMetric,
    start: &ExtractionResult,
    epsilon: f64,
    k: f64,
    theta: f64,
) -> Result<ExtractionResult, RamseyError> {
    let x = &wm.base;
    let w = wm.weights();
    let beta = 8.0 * k / epsilon;
    let kh = um_to_khst(&start.tree, &powered(w, start.psi), theta * beta, 2.0)?;
    let (z, _) = khst_to_composition(x, &kh.tree, theta, beta)?;
    let eq = WeightedEquilateral { alpha: 2.0 + epsilon / 4.0 };
    let lifted = composition_lift(&eq, &z, x, &powered(w, start.psi * kh.psi), k)?;
    let psi = start.psi * kh.psi * lifted.psi;
    let mut trace = start.trace.clone();
    trace.push(Stage {
        op: "um_to_khst".to_string(),
        alpha: 2.0,
        size: kh.subset.len(),
        distortion: kh.report.distortion,
        psi: kh.psi,
    });
    trace.extend(lifted.trace.iter().cloned());
    let tree = HstTree { k, ..lifted.tree };
    let mut out = ExtractionResult::assemble(x, w, tree, psi, start.heuristic || lifted.heuristic, trace)?;
    if !out.report.within(2.0 + epsilon, Arith::Float) {
        return Err(RamseyError::VerificationFailed {
            stage: "small_alpha".to_string(),
            distortion: out.report.distortion,
            bound: 2.0 + epsilon,
        });
    }
    out.trace.push(out.stage("small_alpha", 2.0 + epsilon));
    Ok(out)
}

/// Largest subset found with verified distortion at most `alpha > 2`.
///
/// Candidates come from a fixed pool: the whole space when its
/// subdominant ultrametric is close enough, the refinement chain started
/// at `2^⌈log min(Φ, n)⌉`, and, at every grid distortion `g ≤ 2α`, the
/// equilateral extractors, [`ramsey_phi`] (for `g > 8`) and the
/// small-distortion pipeline (for `g < 3`, with `ε = g - 2`). The pool
/// only grows with `alpha`, so the returned size is monotone in it. Ties
/// go to the smaller distortion, then to the earlier candidate.
///
/// For `alpha ≤ 2` an error carries the best exhaustive (small inputs) or
/// greedy equilateral subset.
pub fn ramsey_extract(
    x: &FiniteMetric,
    alpha: f64,
    weights: Option<&[f64]>,
    opts: &DriverOptions,
) -> Result<ExtractionResult, RamseyError> {
    let wm = weighted(x, weights)?;
    if !(alpha > 2.0) {
        return Err(RamseyError::AlphaAtMostTwo { alpha, fallback: Box::new(fallback(&wm, alpha, opts)?) });
    }
    if x.n() == 1 {
        return trivial(&wm);
    }
    let mut pool = candidates(&wm, 2.0 * alpha)?;
    let start = large_stage(&wm, opts)?;
    for g in grid(2.0 * alpha).into_iter().filter(|&g| g < 3.0) {
        if let Ok(r) = small_alpha_from(&wm, &start, g - 2.0, 1.0, opts.theta) {
            pool.push(r);
        }
    }
    Ok(select(pool, alpha, opts.arith).expect("the pool always holds a pair"))
}

/// Grid of candidate distortions up to `gmax`.
fn grid(gmax: f64) -> Vec<f64> {
    let mut g = vec![2.25, 2.5, 2.9, 3.0];
    let mut p = 4.0;
    while p <= 1.0e6 {
        g.push(p);
        g.push(1.5 * p);
        p *= 2.0;
    }
    g.into_iter().filter(|&v| v <= gmax).collect()
}

fn candidates(wm: &WeightedMetric, gmax: f64) -> Result<Vec<ExtractionResult>, RamseyError> {
    let x = &wm.base;
    let w = wm.weights();
    let n = x.n();
    let uniform = w.iter().all(|&v| v == w[0]);
    let mut pool = Vec::new();
    let mut whole = ExtractionResult::assemble(x, w, single_linkage_tree(x), 1.0, false, Vec::new())?;
    whole.trace.push(whole.stage("single_linkage", whole.report.distortion));
    pool.push(whole);
    let (naive, _, _) = naive_ultrametric(x);
    let mut naive = ExtractionResult::assemble(x, w, naive, 1.0, false, Vec::new())?;
    naive.trace.push(naive.stage("naive_ultrametric", naive.report.distortion));
    pool.push(naive.clone());

    // Refinement chain: independent of the requested distortion.
    let phi = aspect_ratio(x);
    let mut level = num::exp2(num::guarded_ceil(num::log2(phi.min(n as f64))));
    let mut cur = if phi <= n as f64 {
        let all: Vec<usize> = (0..n).collect();
        let mut s = ExtractionResult::assemble(x, w, HstTree::star(&all, x.diam()), 1.0, false, Vec::new())?;
        s.trace.push(s.stage("star", level));
        s
    } else {
        naive
    };
    while level > 8.0 {
        match refine(x, w, &cur, level) {
            Ok(r) => {
                pool.push(r.clone());
                cur = r;
            }
            Err(_) => break,
        }
        level /= 2.0;
    }

    let all: Vec<usize> = (0..n).collect();
    for g in grid(gmax) {
        if uniform {
            let s = equilateral_on(x, &all, g);
            let levels = num::guarded_ceil(num::ln(phi) / num::ln(g / 2.0)).max(1.0);
            let psi = if s.len() == n { 1.0 } else { 0.5 / levels };
            let mut r = ExtractionResult::assemble(x, w, HstTree::star(&s, x.diam_of(&s)), psi, false, Vec::new())?;
            r.trace.push(r.stage("equilateral", g));
            pool.push(r);
        }
        pool.push(weighted_equilateral_extract(wm, g)?);
        if g > 8.0 {
            pool.push(ramsey_phi(wm, g)?);
        }
    }
    Ok(pool)
}

/// Best large-distortion extraction at `θ/2`, the first stage of the
/// small-distortion pipeline.
fn large_stage(wm: &WeightedMetric, opts: &DriverOptions) -> Result<ExtractionResult, RamseyError> {
    let pool = candidates(wm, opts.theta)?;
    Ok(select(pool, opts.theta / 2.0, opts.arith).expect("the whole space is within its own distortion"))
}

fn select(pool: Vec<ExtractionResult>, alpha: f64, arith: Arith) -> Option<ExtractionResult> {
    let mut best: Option<ExtractionResult> = None;
    for r in pool {
        if !r.report.within(alpha, arith) {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => r.len() > b.len() || (r.len() == b.len() && r.report.distortion < b.report.distortion),
        };
        if better {
            best = Some(r);
        }
    }
    best
}

fn fallback(wm: &WeightedMetric, alpha: f64, opts: &DriverOptions) -> Result<ExtractionResult, RamseyError> {
    let x = &wm.base;
    let w = wm.weights();
    let n = x.n();
    let (tree, op) = if n <= opts.oracle_cap {
        let s = exact_ramsey_oracle(x, alpha, Target::Ultrametric, opts.oracle_cap, opts.arith)?;
        let ids = s.indices();
        let t = single_linkage_tree(&x.restrict(ids));
        (HstTree { root: relabel(&t.root, ids), ..t }, "oracle")
    } else {
        let all: Vec<usize> = (0..n).collect();
        let eq = equilateral_on(x, &all, alpha);
        let far = (1..n).fold(0, |b, j| if x.d(0, j) > x.d(0, b) { j } else { b });
        if eq.len() >= 2 || alpha < 1.0 || far == 0 {
            (HstTree::star(&eq, x.diam_of(&eq)), "equilateral")
        } else {
            (HstTree::star(&[0, far], x.d(0, far)), "pair")
        }
    };
    let mut r = ExtractionResult::assemble(x, w, tree, 0.0, true, Vec::new())?;
    r.trace.push(r.stage(op, alpha));
    Ok(r)
}

fn relabel(u: &HstNode, ids: &[usize]) -> HstNode {
    match u {
        HstNode::Leaf(i) => HstNode::Leaf(ids[*i]),
        HstNode::Internal { delta, children } => {
            HstNode::Internal { delta: *delta, children: children.iter().map(|c| relabel(c, ids)).collect() }
        }
    }
}

fn trivial(wm: &WeightedMetric) -> Result<ExtractionResult, RamseyError> {
    ExtractionResult::assemble(&wm.base, wm.weights(), HstTree::leaf(0), 1.0, false, Vec::new())
}

fn weighted(x: &FiniteMetric, weights: Option<&[f64]>) -> Result<WeightedMetric, RamseyError> {
    Ok(match weights {
        Some(w) => WeightedMetric::new(x.clone(), w.to_vec())?,
        None => WeightedMetric::uniform(x.clone()),
    })
}

fn powered(w: &[f64], e: f64) -> Vec<f64> {
    w.iter().map(|&v| num::pow(v, e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::weighted_condition_certified;
    use crate::metric::{build_metric, exact_ramsey_oracle};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_metric(n: usize, seed: u64) -> FiniteMetric {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = num::exp2(rng.gen_range(0.0..10.0));
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        build_metric(&d, None).unwrap()
    }

    fn equilateral(n: usize) -> FiniteMetric {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        build_metric(&rows, None).unwrap()
    }

    #[test]
    fn refine_halves_distortion() {
        let x = random_metric(64, 5);
        let w = vec![1.0; 64];
        let (t, _, rep) = naive_ultrametric(&x);
        let start = ExtractionResult::assemble(&x, &w, t, 1.0, false, Vec::new()).unwrap();
        assert!(rep.distortion <= 64.0);
        let r = refine(&x, &w, &start, 64.0).unwrap();
        assert!(r.report.within(32.0, Arith::Exact));
        assert!(!r.is_empty());
        assert!(weighted_condition_certified(&w, r.subset.indices(), r.psi));
    }

    #[test]
    fn refine_keeps_ultrametric_and_equilateral_inputs() {
        let eq = equilateral(6);
        let w = vec![1.0; 6];
        let start = ExtractionResult::assemble(&eq, &w, HstTree::star(&[0, 1, 2, 3, 4, 5], 1.0), 1.0, false, Vec::new()).unwrap();
        let r = refine(&eq, &w, &start, 16.0).unwrap();
        assert_eq!((r.len(), r.report.distortion), (6, 1.0));
        assert!(matches!(refine(&eq, &w, &start, 8.0), Err(RamseyError::AlphaTooSmall { .. })));
    }

    #[test]
    fn small_alpha_on_random_metric() {
        let x = random_metric(64, 9);
        let r = small_alpha_extract(&x, None, 0.5, 2.0, &DriverOptions::default()).unwrap();
        assert!(r.report.within(2.5, Arith::Exact));
        assert!(r.len() >= 2);
        assert!(weighted_condition_certified(&[1.0; 64], r.subset.indices(), r.psi));
        r.tree.validate().unwrap();
        assert!(matches!(
            small_alpha_extract(&x, None, 1.0, 1.0, &DriverOptions::default()),
            Err(RamseyError::InvalidEpsilon { .. })
        ));
        let eq = small_alpha_extract(&equilateral(5), None, 0.5, 1.0, &DriverOptions::default()).unwrap();
        assert_eq!((eq.len(), eq.report.distortion), (5, 1.0));
    }

    #[test]
    fn extract_against_oracle() {
        let opts = DriverOptions { arith: Arith::Exact, ..DriverOptions::default() };
        for seed in 0..5 {
            let x = random_metric(9, seed);
            let r = ramsey_extract(&x, 4.0, None, &opts).unwrap();
            assert!(r.report.within(4.0, Arith::Exact));
            let best = exact_ramsey_oracle(&x, 4.0, Target::Ultrametric, 15, Arith::Exact).unwrap();
            assert!(r.len() >= 2 && r.len() <= best.len());
        }
    }

    #[test]
    fn extract_is_monotone_and_exact_on_ultrametrics() {
        let x = random_metric(30, 2);
        let mut last = 0;
        for alpha in [2.5, 3.0, 4.0, 6.0, 12.0, 40.0] {
            let r = ramsey_extract(&x, alpha, None, &DriverOptions::default()).unwrap();
            assert!(r.len() >= last);
            last = r.len();
        }
        let um = crate::hst::hst_metric(&single_linkage_tree(&x)).unwrap();
        let r = ramsey_extract(&um, 2.5, None, &DriverOptions::default()).unwrap();
        assert_eq!(r.len(), 30);
    }

    #[test]
    fn low_alpha_falls_back() {
        let x = random_metric(10, 4);
        match ramsey_extract(&x, 1.5, None, &DriverOptions::default()) {
            Err(RamseyError::AlphaAtMostTwo { fallback, .. }) => {
                let best = exact_ramsey_oracle(&x, 1.5, Target::Ultrametric, 15, Arith::Float).unwrap();
                assert_eq!(fallback.len(), best.len());
                assert!(fallback.report.within(1.5, Arith::Float));
            }
            other => panic!("unexpected {other:?}"),
        }
        let big = random_metric(40, 4);
        match ramsey_extract(&big, 2.0, None, &DriverOptions::default()) {
            Err(RamseyError::AlphaAtMostTwo { fallback, .. }) => assert!(fallback.len() >= 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
