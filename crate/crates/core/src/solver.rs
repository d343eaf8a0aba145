//! Signal Space CoSaMP. One loop covers both the unstructured method and its
//! block-sparse variant; the block size is carried by the dictionary, so a
//! dictionary with `B = 1` gives the classic algorithm.

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::model::{self, check_len, Dictionary, SensingMatrix, Signal, Support};
use crate::selectors::SupportSelector;
use nalgebra::DVector;

#[derive(Debug, Clone)]
pub struct RecoveryProblem<S: Scalar> {
    pub y: DVector<S>,
    pub sensing: SensingMatrix<S>,
    pub dict: Dictionary<S>,
    /// Block sparsity (number of blocks of the dictionary's block size).
    pub k: usize,
    /// Support expansion multiplier `a`.
    pub expansion: usize,
}

impl<S: Scalar> RecoveryProblem<S> {
    pub fn new(y: DVector<S>, sensing: SensingMatrix<S>, dict: Dictionary<S>, k: usize, expansion: usize) -> Result<Self> {
        check_len("RecoveryProblem: y vs m", sensing.m(), y.len())?;
        check_len("RecoveryProblem: M columns vs d", dict.d(), sensing.d())?;
        if k == 0 || k > dict.num_blocks() {
            return Err(Error::InvalidParameter(format!(
                "sparsity {k} outside [1, {}]",
                dict.num_blocks()
            )));
        }
        if expansion == 0 {
            return Err(Error::InvalidParameter("expansion multiplier must be at least 1".into()));
        }
        Ok(Self {
            y,
            sensing,
            dict,
            k,
            expansion,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaltingPolicy {
    pub max_iterations: usize,
    /// Stop once `‖y_r‖₂ ≤ relative_residual_tolerance · ‖y‖₂`.
    pub relative_residual_tolerance: f64,
    /// Stop when `‖y_r‖₂` decreases by less than this fraction of its previous value.
    pub stall_tolerance: f64,
}

impl Default for HaltingPolicy {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            relative_residual_tolerance: 1e-6,
            stall_tolerance: 1e-6,
        }
    }
}

impl HaltingPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.relative_residual_tolerance >= 0.0) || !(self.stall_tolerance >= 0.0) {
            return Err(Error::InvalidParameter("halting tolerances must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    ResidualTolerance,
    Stall,
    MaxIterations,
}

impl HaltReason {
    pub fn as_str(self) -> &'static str {
        match self {
            HaltReason::ResidualTolerance => "residual",
            HaltReason::Stall => "stall",
            HaltReason::MaxIterations => "max-iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<S: Scalar> {
    pub t: usize,
    /// `T̃^t`, the merged support fed to least squares.
    pub merged_support: Support,
    /// `T^t`, the support after shrinking.
    pub support: Support,
    pub estimate: Signal<S>,
    pub residual_norm: f64,
    pub estimate_norm: f64,
    /// `‖x^t − x‖₂` when ground truth was supplied.
    pub error_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace<S: Scalar> {
    pub iterations: Vec<IterationRecord<S>>,
    pub estimate: Signal<S>,
    pub halt: HaltReason,
}

impl<S: Scalar> SolverTrace<S> {
    pub fn iterations_used(&self) -> usize {
        self.iterations.len()
    }
}

/// `M* y_r`.
pub fn correlate_residual<S: Scalar>(sensing: &SensingMatrix<S>, residual: &DVector<S>) -> Result<Signal<S>> {
    sensing.adjoint_apply(residual)
}

/// Runs SSCoSaMP. `expand` is asked for `a·k` blocks (capped at the number of
/// blocks) and `shrink` for `k` blocks.
pub fn sscosamp<S, E, H>(
    problem: &RecoveryProblem<S>,
    expand: &E,
    shrink: &H,
    halt: &HaltingPolicy,
    x_true: Option<&Signal<S>>,
) -> Result<SolverTrace<S>>
where
    S: Scalar,
    E: SupportSelector<S> + ?Sized,
    H: SupportSelector<S> + ?Sized,
{
    halt.validate()?;
    let RecoveryProblem {
        y,
        sensing,
        dict,
        k,
        expansion,
    } = problem;
    if let Some(x) = x_true {
        check_len("sscosamp: ground truth", dict.d(), x.len())?;
    }
    let expand_target = (expansion * k).min(dict.num_blocks());
    let tolerance = halt.relative_residual_tolerance * y.norm();
    let wrap = |iteration: usize| move |e: Error| Error::Selector {
        iteration,
        source: Box::new(e),
    };

    let mut support = Support::empty();
    let mut residual = y.clone();
    let mut residual_norm = y.norm();
    let mut estimate;
    let mut iterations = Vec::new();
    let mut t = 0;
    let reason = loop {
        t += 1;
        let proxy = correlate_residual(sensing, &residual)?;
        let delta = expand.select(dict, &proxy, expand_target).map_err(wrap(t))?;
        let merged = support.union(&delta);
        let (x_p, _) = model::constrained_least_squares(sensing, dict, &merged, y)?;
        support = shrink.select(dict, &x_p, *k).map_err(wrap(t))?;
        estimate = model::project_onto_range(dict, &support, &x_p)?;
        residual = y - sensing.apply(&estimate)?;
        let previous = residual_norm;
        residual_norm = residual.norm();
        iterations.push(IterationRecord {
            t,
            merged_support: merged,
            support: support.clone(),
            estimate: estimate.clone(),
            residual_norm,
            estimate_norm: estimate.norm(),
            error_norm: x_true.map(|x| (&estimate - x).norm()),
        });
        if residual_norm <= tolerance {
            break HaltReason::ResidualTolerance;
        }
        if previous - residual_norm < halt.stall_tolerance * previous {
            break HaltReason::Stall;
        }
        if t >= halt.max_iterations {
            break HaltReason::MaxIterations;
        }
    };
    Ok(SolverTrace {
        iterations,
        estimate,
        halt: reason,
    })
}
