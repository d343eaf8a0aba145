//! Support-selection schemes used as (near-)optimal projections.
//!
//! Every selector reads the block size from the dictionary it is handed;
//! give it a re-blocked view ([`Dictionary::with_block_size`]) to run the
//! unstructured variant on the same atoms. Correlation scores are normalised
//! by column norms, and all argmax decisions break ties toward the lowest
//! index.

use crate::combinatorics::{self, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::genprob::ExperimentSeed;
use crate::linalg::{self, IncrementalBasis};
use crate::model::{check_len, Dictionary, Signal, Support};
use nalgebra::DVector;
use rayon::prelude::*;

pub trait SupportSelector<S: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    /// Selects a support approximating the best `k`-block representation of `z`.
    fn select(&self, dict: &Dictionary<S>, z: &Signal<S>, k: usize) -> Result<Support>;
}

impl<S: Scalar, T: SupportSelector<S> + ?Sized> SupportSelector<S> for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn select(&self, dict: &Dictionary<S>, z: &Signal<S>, k: usize) -> Result<Support> {
        (**self).select(dict, z, k)
    }
}

fn check_target(dict_blocks: usize, k: usize) -> Result<()> {
    if k > dict_blocks {
        return Err(Error::InvalidParameter(format!(
            "target of {k} blocks exceeds the {dict_blocks} available"
        )));
    }
    Ok(())
}

/// Squared block scores `Σ_{l ∈ block} |⟨d_l, r⟩|² / ‖d_l‖²` from correlations `D* r`.
fn block_scores<S: Scalar>(dict: &Dictionary<S>, block_size: usize, corr: &DVector<S>) -> Vec<f64> {
    let mut scores = vec![0.0; dict.n() / block_size];
    for (l, c) in corr.iter().enumerate() {
        let norm = dict.column_norm(l);
        scores[l / block_size] += c.modulus_squared() / (norm * norm);
    }
    scores
}

/// Index of the largest score among `eligible` entries; lowest index wins ties.
fn argmax_eligible(scores: &[f64], eligible: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if !eligible(i) {
            continue;
        }
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

fn push_block<S: Scalar>(basis: &mut IncrementalBasis<S>, dict: &Dictionary<S>, block: usize, block_size: usize) {
    for atom in block * block_size..(block + 1) * block_size {
        basis.push(&dict.matrix().column(atom).into_owned());
    }
}

/// Greedy block pursuit shared by OMP (`block_size = 1`) and BOMP.
fn greedy_pursuit<S: Scalar>(dict: &Dictionary<S>, z: &Signal<S>, k: usize, block_size: usize) -> Result<Support> {
    check_len("greedy pursuit", dict.d(), z.len())?;
    let blocks = dict.n() / block_size;
    check_target(blocks, k)?;
    let mut taken = vec![false; blocks];
    let mut chosen = Vec::with_capacity(k);
    let mut basis = IncrementalBasis::new(dict.d());
    let mut residual = z.clone();
    for _ in 0..k {
        let corr = dict.matrix().ad_mul(&residual);
        let scores = block_scores(dict, block_size, &corr);
        let best = argmax_eligible(&scores, |b| !taken[b]).expect("k does not exceed block count");
        taken[best] = true;
        chosen.push(best);
        push_block(&mut basis, dict, best, block_size);
        residual = basis.residual(z);
    }
    Support::from_blocks(chosen, block_size, dict.n())
}

/// Keeps the `k` blocks with the largest normalised correlation energy with `z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Thresholding;

impl<S: Scalar> SupportSelector<S> for Thresholding {
    fn name(&self) -> &str {
        "thresholding"
    }

    fn select(&self, dict: &Dictionary<S>, z: &Signal<S>, k: usize) -> Result<Support> {
        let b = dict.block_size();
        let scores = block_scores(dict, b, &dict.analyze(z)?);
        let mut order: Vec<usize> = (0..scores.len()).collect();
        // stable sort keeps ascending index order among equal scores
        order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
        order.truncate(k.min(scores.len()));
        Support::from_blocks(order, b, dict.n())
    }
}

/// Orthogonal matching pursuit over single atoms, ignoring any block structure.
#[derive(Debug, Clone, Copy, Default)]
pub struct Omp;

impl<S: Scalar> SupportSelector<S> for Omp {
    fn name(&self) -> &str {
        "omp"
    }

    fn select(&self, dict: &Dictionary<S>, z: &Signal<S>, k: usize) -> Result<Support> {
        greedy_pursuit(dict, z, k, 1)
    }
}

/// Block OMP: greedy selection of whole blocks by correlation energy.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bomp;

impl<S: Scalar> SupportSelector<S> for Bomp {
    fn name(&self) -> &str {
        "bomp"
    }

    fn select(&self, dict: &Dictionary<S>, z: &Signal<S>, k: usize) -> Result<Support> {
        greedy_pursuit(dict, z, k, dict.block_size())
    }
}

/// Blocks holding an atom whose squared normalised correlation with some atom
/// of `support` is at least `1 − ε²`. Always contains the blocks covering
/// `support` itself.
pub fn epsilon_block_extension<S: Scalar>(dict: &Dictionary<S>, support: &Support, epsilon: f64) -> Result<Support> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside [0, 1)")));
    }
    let b = dict.block_size();
    let n = dict.n();
    let threshold = 1.0 - epsilon * epsilon - 1e-12;
    let mut hit = vec![false; dict.num_blocks()];
    for &j in support.atoms() {
        if j >= n {
            return Err(Error::InvalidSupport { index: j, n });
        }
        hit[j / b] = true;
        let dj = dict.matrix().column(j);
        let gram_row = dict.matrix().ad_mul(&dj);
        let nj = dict.column_norm(j);
        for (l, g) in gram_row.iter().enumerate() {
            let nl = dict.column_norm(l);
            if g.modulus_squared() / (nl * nl * nj * nj) >= threshold {
                hit[l / b] = true;
            }
        }
    }
    let blocks = hit.iter().enumerate().filter(|(_, &h)| h).map(|(i, _)| i);
    Support::from_blocks(blocks, b, n)
}

/// Per-run diagnostics of [`EpsBomp`].
#[derive(Debug, Clone, PartialEq)]
pub struct EpsBompOutcome {
    pub support: Support,
    /// Blocks picked by the greedy step (before extension).
    pub chosen_blocks: Vec<usize>,
    /// Realised inflation `⌈|support| / (k·B)⌉`.
    pub inflation: usize,
    /// The extension covered every block before `k` greedy steps completed.
    pub exhausted: bool,
}

/// ε-block OMP. Greedy block selection as in BOMP, but after each step the
/// returned support is grown by the ε-block-extension of the single most
/// correlated atom of the chosen block, and blocks already inside that
/// extended support are no longer eligible.
#[derive(Debug, Clone, Copy)]
pub struct EpsBomp {
    pub epsilon: f64,
}

impl EpsBomp {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside [0, 1)")));
        }
        Ok(Self { epsilon })
    }

    pub fn select_with_outcome<S: Scalar>(&self, dict: &Dictionary<S>, z: &Signal<S>, k: usize) -> Result<EpsBompOutcome> {
        check_len("eps-bomp", dict.d(), z.len())?;
        let b = dict.block_size();
        let n = dict.n();
        check_target(dict.num_blocks(), k)?;
        let mut extended = Support::empty();
        let mut chosen = Vec::with_capacity(k);
        let mut basis = IncrementalBasis::new(dict.d());
        let mut residual = z.clone();
        let mut exhausted = false;
        for _ in 0..k {
            let covered = extended.blocks(b);
            let corr = dict.matrix().ad_mul(&residual);
            let scores = block_scores(dict, b, &corr);
            let Some(best) = argmax_eligible(&scores, |blk| covered.binary_search(&blk).is_err()) else {
                exhausted = true;
                break;
            };
            chosen.push(best);
            push_block(&mut basis, dict, best, b);
            // the extension anchor uses the residual from before this step
            let anchor = (best * b..(best + 1) * b)
                .map(|l| (l, corr[l].modulus_squared() / dict.column_norm(l).powi(2)))
                .fold(None::<(usize, f64)>, |acc, (l, s)| match acc {
                    Some((_, bs)) if s <= bs => acc,
                    _ => Some((l, s)),
                })
                .map(|(l, _)| l)
                .expect("blocks are nonempty");
            let ext = epsilon_block_extension(dict, &Support::from_atoms([anchor], n)?, self.epsilon)?;
            extended = extended.union(&ext);
            residual = basis.residual(z);
        }
        if !exhausted && chosen.len() < k {
            exhausted = true;
        }
        let denom = (k * b).max(1);
        let inflation = extended.len().div_ceil(denom);
        Ok(EpsBompOutcome {
            support: extended,
            chosen_blocks: chosen,
            inflation,
            exhausted,
        })
    }
}

impl<S: Scalar> SupportSelector<S> for EpsBomp {
    fn name(&self) -> &str {
        "eps-bomp"
    }

    fn select(&self, dict: &Dictionary<S>, z: &Signal<S>, k: usize) -> Result<Support> {
        Ok(self.select_with_outcome(dict, z, k)?.support)
    }
}

/// Exhaustive optimal projection: the `k`-block support minimising
/// `‖z − P_T z‖₂²`, ties resolved toward the lexicographically smallest block set.
#[derive(Debug, Clone, Copy)]
pub struct OptimalBruteforce {
    pub cap: u64,
}

impl Default for OptimalBruteforce {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl OptimalBruteforce {
    /// Optimal support together with its residual energy `‖Q_T z‖₂²`.
    pub fn select_with_residual<S: Scalar>(&self, dict: &Dictionary<S>, z: &Signal<S>, k: usize) -> Result<(Support, f64)> {
        check_len("optimal projection", dict.d(), z.len())?;
        let b = dict.block_size();
        let k = k.min(dict.num_blocks());
        let tie = 1e-12 * linalg::norm_sq(z).max(f64::MIN_POSITIVE);
        let best = combinatorics::par_map_reduce(
            dict.num_blocks(),
            k,
            self.cap,
            |blocks| {
                let mut basis = IncrementalBasis::new(dict.d());
                for &blk in blocks {
                    push_block(&mut basis, dict, blk, b);
                }
                (linalg::norm_sq(&basis.residual(z)), blocks.to_vec())
            },
            |left, right| if right.0 < left.0 - tie { right } else { left },
        )?
        .expect("at least one candidate support");
        Ok((Support::from_blocks(best.1, b, dict.n())?, best.0))
    }
}

impl<S: Scalar> SupportSelector<S> for OptimalBruteforce {
    fn name(&self) -> &str {
        "optimal"
    }

    fn select(&self, dict: &Dictionary<S>, z: &Signal<S>, k: usize) -> Result<Support> {
        Ok(self.select_with_residual(dict, z, k)?.0)
    }
}

/// `(‖P_T z‖², ‖Q_T z‖²)`, both from the same orthonormal basis so that equal
/// supports give bitwise equal energies.
fn split_energy<S: Scalar>(dict: &Dictionary<S>, support: &Support, z: &Signal<S>) -> (f64, f64) {
    let mut basis = IncrementalBasis::new(dict.d());
    for &atom in support.atoms() {
        basis.push(&dict.matrix().column(atom).into_owned());
    }
    (linalg::norm_sq(&basis.project(z)), linalg::norm_sq(&basis.residual(z)))
}

/// Worst-case near-optimality ratios of a selector against the exhaustive optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct NearOptimalityReport {
    /// `max ‖z − P_S z‖² / ‖z − P_{S*} z‖²`; NaN when every trial was skipped.
    pub c_hat: f64,
    /// `min ‖P_S z‖² / ‖P_{S*} z‖²`.
    pub c_tilde_hat: f64,
    pub trials: usize,
    /// Trials with a vanishing optimal residual, for which the C ratio is undefined.
    pub skipped: usize,
    pub k: usize,
    pub block_size: usize,
}

/// Draws `trials` standard-normal test vectors and records the worst ratios
/// of `selector` against [`OptimalBruteforce`].
pub fn estimate_near_optimality<S: Scalar, Sel: SupportSelector<S> + ?Sized>(
    selector: &Sel,
    dict: &Dictionary<S>,
    k: usize,
    trials: usize,
    seed: u64,
    cap: u64,
) -> Result<NearOptimalityReport> {
    combinatorics::checked_count(dict.num_blocks(), k.min(dict.num_blocks()), cap)?;
    let oracle = OptimalBruteforce { cap };
    let ratios: Vec<(Option<f64>, Option<f64>)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<(Option<f64>, Option<f64>)> {
            let mut rng = ExperimentSeed::new(seed, t).rng();
            let z = DVector::from_fn(dict.d(), |_, _| S::standard_normal(&mut rng));
            let z_energy = linalg::norm_sq(&z);
            let (opt, _) = oracle.select_with_residual(dict, &z, k)?;
            let s = selector.select(dict, &z, k)?;
            let (opt_captured, opt_residual) = split_energy(dict, &opt, &z);
            let (captured, residual) = split_energy(dict, &s, &z);
            let c = (opt_residual >= 1e-12 * z_energy).then(|| residual / opt_residual);
            let c_tilde = (opt_captured > 0.0).then(|| captured / opt_captured);
            Ok((c, c_tilde))
        })
        .collect::<Result<_>>()?;
    let skipped = ratios.iter().filter(|r| r.0.is_none()).count();
    let c_hat = ratios.iter().filter_map(|r| r.0).fold(f64::NAN, f64::max);
    let c_tilde_hat = ratios.iter().filter_map(|r| r.1).fold(f64::NAN, f64::min);
    Ok(NearOptimalityReport {
        c_hat,
        c_tilde_hat,
        trials,
        skipped,
        k,
        block_size: dict.block_size(),
    })
}
