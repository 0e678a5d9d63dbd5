//! Constructive extraction of large subsets that embed into ultrametrics
//! with prescribed distortion, together with the weighted guarantee
//! `Σ_{Y} w^ψ ≥ (Σ_X w)^ψ`.

mod driver;
mod equilateral;
mod lift;
mod sequences;
mod shell;

pub use driver::{ramsey_extract, refine, small_alpha_extract, DriverOptions, DEFAULT_THETA};
pub use equilateral::{equilateral_extract, equilateral_psi, weighted_equilateral_extract};
pub use lift::{composition_lift, Extractor, RamseyCore, RamseyPhi, WeightedEquilateral};
pub use sequences::{
    balance_binary, decompose_sequence, decomposition_scan, is_q_decomposable, pinfty_bound_check, Scan,
    WeightDecomposition,
};
pub use shell::{beta_phi, phi_exponent, ramsey_core, ramsey_phi};

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::exact::weighted_condition_certified;
use crate::hst::{hst_metric, HstError, HstTree};
use crate::metric::{distortion, Arith, EmbeddingReport, FiniteMetric, MetricError, PointSubset};
use crate::num::{self, le_tol};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RamseyError {
    #[error("QTooSmall: q = {q} is below {min}")]
    QTooSmall { q: f64, min: f64 },
    #[error("AllZero: the sequence has no positive entry")]
    AllZero,
    #[error("InvalidWeight: entry {index} is negative or not finite")]
    InvalidWeight { index: usize },
    #[error("NotDecomposable: weight {index} is neither heavy nor on the common level")]
    NotDecomposable { index: usize },
    #[error("TTooSmall: t = {t} is below 8")]
    TTooSmall { t: usize },
    #[error("AlphaTooSmall: alpha = {alpha} is at most {min}")]
    AlphaTooSmall { alpha: f64, min: f64 },
    #[error("AlphaAtMostTwo: alpha = {alpha} <= 2 admits only logarithmic subsets; fallback of size {}", fallback.subset.len())]
    AlphaAtMostTwo { alpha: f64, fallback: Box<ExtractionResult> },
    #[error("SeparationTooSmall: separation {separation} is below alpha * k = {required}")]
    SeparationTooSmall { separation: f64, required: f64 },
    #[error("InvalidEpsilon: epsilon = {epsilon} is outside (0, 1)")]
    InvalidEpsilon { epsilon: f64 },
    #[error("VerificationFailed: {stage} produced distortion {distortion} above {bound}")]
    VerificationFailed { stage: String, distortion: f64, bound: f64 },
    #[error(transparent)]
    Hst(#[from] HstError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// One step of an extraction pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    pub op: String,
    pub alpha: f64,
    pub size: usize,
    pub distortion: f64,
    pub psi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionResult {
    /// Ascending indices into the input space.
    pub subset: PointSubset,
    /// Leaves carry the same indices as `subset`.
    pub tree: HstTree,
    /// `map[i]` is the leaf id matched with `subset[i]`.
    pub map: Vec<usize>,
    /// Distortion of `subset -> tree`, recomputed from the two matrices.
    pub report: EmbeddingReport,
    pub psi: f64,
    pub weighted_lhs: f64,
    pub weighted_rhs: f64,
    /// Set when a stage ran outside the parameter range its guarantee covers.
    pub heuristic: bool,
    pub trace: Vec<Stage>,
}

impl ExtractionResult {
    /// Builds a result around `tree`, recomputing the distortion from
    /// scratch and evaluating both sides of the weighted condition.
    pub fn assemble(
        x: &FiniteMetric,
        weights: &[f64],
        tree: HstTree,
        psi: f64,
        heuristic: bool,
        trace: Vec<Stage>,
    ) -> Result<Self, RamseyError> {
        let ids = tree.leaf_ids();
        let subset = PointSubset::new(ids.clone(), x.n())?;
        let tm = hst_metric(&tree)?;
        let identity: Vec<usize> = (0..ids.len()).collect();
        let report = distortion(&x.restrict(&ids), &tm, &identity)?;
        let (weighted_lhs, weighted_rhs) = weighted_sides(weights, &ids, psi);
        Ok(ExtractionResult { subset, tree, map: ids, report, psi, weighted_lhs, weighted_rhs, heuristic, trace })
    }

    pub fn len(&self) -> usize {
        self.subset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subset.is_empty()
    }

    /// Recomputes the distortion against `x` and compares it with `alpha`.
    pub fn verify_distortion(&self, x: &FiniteMetric, alpha: f64, arith: Arith) -> bool {
        let Ok(tm) = hst_metric(&self.tree) else { return false };
        let identity: Vec<usize> = (0..self.len()).collect();
        match distortion(&x.restrict(self.subset.indices()), &tm, &identity) {
            Ok(r) => r.within(alpha, arith),
            Err(_) => false,
        }
    }

    /// `Σ_Y w^ψ ≥ (Σ w)^ψ` for the recorded exponent: certified in exact mode, with
    /// relative slack otherwise.
    pub fn weighted_condition(&self, weights: &[f64], arith: Arith) -> bool {
        match arith {
            Arith::Exact => weighted_condition_certified(weights, self.subset.indices(), self.psi),
            Arith::Float => {
                let (l, r) = weighted_sides(weights, self.subset.indices(), self.psi);
                le_tol(r, l)
            }
        }
    }

    fn stage(&self, op: &str, alpha: f64) -> Stage {
        Stage { op: op.into(), alpha, size: self.len(), distortion: self.report.distortion, psi: self.psi }
    }
}

pub(crate) fn weighted_sides(weights: &[f64], subset: &[usize], psi: f64) -> (f64, f64) {
    let lhs = subset.iter().map(|&i| num::pow(weights[i], psi)).sum();
    let rhs = num::pow(weights.iter().sum::<f64>(), psi);
    (lhs, rhs)
}

pub(crate) fn check_weights(w: &[f64]) -> Result<(), RamseyError> {
    for (index, &v) in w.iter().enumerate() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(RamseyError::InvalidWeight { index });
        }
    }
    if w.iter().all(|&v| v == 0.0) {
        return Err(RamseyError::AllZero);
    }
    Ok(())
}
