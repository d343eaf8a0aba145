//! Restricted isometry constants of `M` over signals with (block-)sparse
//! representations in `D`, computed exactly by enumeration on tiny instances
//! or lower-bounded by sampling, plus numerical checks of the elementary
//! consequences of the D-RIP.
//!
//! Block-mode constants are indexed by block count: `k` means unions of `k`
//! blocks of the dictionary's block size.

use crate::combinatorics::{self, for_each_combination};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::genprob::ExperimentSeed;
use crate::linalg;
use crate::model::{self, check_len, Dictionary, SensingMatrix, Support};
use crate::selectors::{OptimalBruteforce, SupportSelector};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Slack allowed when comparing an operator norm to the constant it is bounded by.
pub const LEMMA_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RipMode {
    Exact,
    SampledLowerBound,
}

impl RipMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RipMode::Exact => "exact",
            RipMode::SampledLowerBound => "sampled-lower-bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RipEstimate {
    pub delta: f64,
    pub mode: RipMode,
    pub k: usize,
    pub block_size: usize,
    pub supports_examined: u64,
}

fn check_shapes<S: Scalar>(sensing: &SensingMatrix<S>, dict: &Dictionary<S>) -> Result<()> {
    check_len("rip: M columns vs d", dict.d(), sensing.d())
}

fn blocks_support<S: Scalar>(dict: &Dictionary<S>, blocks: &[usize]) -> Support {
    Support::from_blocks(blocks.iter().copied(), dict.block_size(), dict.n()).expect("blocks are in range")
}

/// `max |‖Mv‖²/‖v‖² − 1|` over nonzero `v ∈ range(D_T)`. Null directions of
/// `D_T` are excluded.
pub fn support_deviation<S: Scalar>(sensing: &SensingMatrix<S>, dict: &Dictionary<S>, support: &Support) -> Result<f64> {
    check_shapes(sensing, dict)?;
    let basis = model::range_basis(dict, support)?;
    Ok(basis_deviation(sensing, &basis))
}

fn basis_deviation<S: Scalar>(sensing: &SensingMatrix<S>, basis: &DMatrix<S>) -> f64 {
    let r = basis.ncols();
    if r == 0 {
        return 0.0;
    }
    let sv = linalg::singular_values(&(sensing.matrix() * basis));
    let max = sv.iter().cloned().fold(0.0, f64::max);
    // M U has only min(m, r) singular values; the rest are zero
    let min = if r > sv.len() { 0.0 } else { sv.iter().cloned().fold(f64::INFINITY, f64::min) };
    (max * max - 1.0).max(1.0 - min * min).max(0.0)
}

/// Exact D-RIP (block-D-RIP) constant over all unions of `k` blocks.
pub fn exact_drip<S: Scalar>(sensing: &SensingMatrix<S>, dict: &Dictionary<S>, k: usize, cap: u64) -> Result<RipEstimate> {
    check_shapes(sensing, dict)?;
    let blocks = dict.num_blocks();
    let k_eff = k.min(blocks);
    let examined = combinatorics::checked_count(blocks, k_eff, cap)?;
    let delta = combinatorics::par_map_reduce(
        blocks,
        k_eff,
        cap,
        |combo| {
            let basis = linalg::range_basis(&model::restrict_columns(dict, &blocks_support(dict, combo)).expect("valid"));
            basis_deviation(sensing, &basis)
        },
        f64::max,
    )?
    .unwrap_or(0.0);
    Ok(RipEstimate {
        delta,
        mode: RipMode::Exact,
        k,
        block_size: dict.block_size(),
        supports_examined: examined,
    })
}

/// Lower bound on the constant from `trials` random `k`-block coefficient vectors.
pub fn sampled_drip_lower_bound<S: Scalar>(
    sensing: &SensingMatrix<S>,
    dict: &Dictionary<S>,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<RipEstimate> {
    check_shapes(sensing, dict)?;
    let blocks = dict.num_blocks();
    let k_eff = k.min(blocks);
    let b = dict.block_size();
    let mut delta = 0.0_f64;
    for t in 0..trials as u64 {
        let mut rng = ExperimentSeed::new(seed, t).rng();
        let chosen = rand::seq::index::sample(&mut rng, blocks, k_eff).into_vec();
        let mut alpha = DVector::<S>::zeros(dict.n());
        for blk in chosen {
            for atom in blk * b..(blk + 1) * b {
                alpha[atom] = S::standard_normal(&mut rng);
            }
        }
        let x = dict.synthesize(&alpha)?;
        let energy = linalg::norm_sq(&x);
        if energy <= f64::MIN_POSITIVE {
            continue;
        }
        let ratio = linalg::norm_sq(&sensing.apply(&x)?) / energy;
        delta = delta.max((ratio - 1.0).abs());
    }
    Ok(RipEstimate {
        delta,
        mode: RipMode::SampledLowerBound,
        k,
        block_size: b,
        supports_examined: trials as u64,
    })
}

/// `(1+c)‖x₁‖² + (1+1/c)‖x₂‖² − ‖x₁+x₂‖²`, nonnegative for every `c > 0`.
pub fn norm_split_margin<S: Scalar>(x1: &DVector<S>, x2: &DVector<S>, c: f64) -> f64 {
    (1.0 + c) * linalg::norm_sq(x1) + (1.0 + 1.0 / c) * linalg::norm_sq(x2) - linalg::norm_sq(&(x1 + x2))
}

/// Worst margins of the D-RIP consequences, each `bound − observed`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub delta: f64,
    pub k: usize,
    pub block_size: usize,
    pub supports_checked: usize,
    pub pairs_checked: usize,
    /// `min_T (1 + δ_k − ‖M P_T‖²)`
    pub operator_norm_margin: f64,
    /// `min_T (δ_k − ‖P_T (I − M*M) P_T‖)`
    pub near_isometry_margin: f64,
    /// `min_{T₁,T₂} (δ_k − ‖P_{T₁} (I − M*M) P_{T₂}‖)` over `k₁ + k₂ ≤ k`
    pub cross_margin: f64,
    /// Smallest optimal-projection margin `‖P_{S*} z‖² − ‖P_T z‖²` over random `z` and all `T`.
    pub projection_margin: f64,
    /// Smallest margin of the two-vector norm split over random pairs and `c ∈ {0.5, 1, 2}`.
    pub norm_split_margin: f64,
    pub passed: bool,
}

/// Checks, for every union of at most `k` blocks (and every pair of unions
/// with `k₁ + k₂ ≤ k` blocks), the operator-norm consequences of the D-RIP
/// with the exact constant `δ_k`; the optimality of the exhaustive projection
/// on random signals; and the two-vector norm split inequality.
pub fn verify_rip_lemmas<S: Scalar>(
    sensing: &SensingMatrix<S>,
    dict: &Dictionary<S>,
    k: usize,
    cap: u64,
) -> Result<LemmaReport> {
    check_shapes(sensing, dict)?;
    let blocks = dict.num_blocks();
    let k = k.min(blocks);
    if k == 0 {
        return Err(Error::InvalidParameter("verify_rip_lemmas needs k >= 1".into()));
    }
    let delta = exact_drip(sensing, dict, k, cap)?.delta;
    let total: u128 = (1..=k).map(|j| combinatorics::binomial(blocks, j)).sum();
    if total > cap as u128 {
        return Err(Error::InfeasibleBruteforce { candidates: total, cap });
    }

    // orthonormal bases and their images under M, grouped by block count
    let mut bases: Vec<Vec<(Support, DMatrix<S>, DMatrix<S>)>> = vec![Vec::new(); k + 1];
    for j in 1..=k {
        for_each_combination(blocks, j, |combo| {
            let support = blocks_support(dict, combo);
            let basis = model::range_basis(dict, &support).expect("valid support");
            let image = sensing.matrix() * &basis;
            bases[j].push((support, basis, image));
        });
    }

    let mut operator_norm_margin = f64::INFINITY;
    let mut near_isometry_margin = f64::INFINITY;
    let mut supports_checked = 0;
    for (_, basis, image) in bases.iter().flatten() {
        supports_checked += 1;
        let op = linalg::spectral_norm(image);
        operator_norm_margin = operator_norm_margin.min(1.0 + delta - op * op);
        let gap = DMatrix::<S>::identity(basis.ncols(), basis.ncols()) - image.ad_mul(image);
        near_isometry_margin = near_isometry_margin.min(delta - linalg::spectral_norm(&gap));
    }

    let mut cross_margin = f64::INFINITY;
    let mut pairs_checked = 0;
    for k1 in 1..k {
        for k2 in 1..=k - k1 {
            for (_, b1, i1) in &bases[k1] {
                for (_, b2, i2) in &bases[k2] {
                    pairs_checked += 1;
                    let op = b1.ad_mul(b2) - i1.ad_mul(i2);
                    cross_margin = cross_margin.min(delta - linalg::spectral_norm(&op));
                }
            }
        }
    }

    let mut rng = ExperimentSeed::new(0x5eed, 0).rng();
    let oracle = OptimalBruteforce { cap };
    let mut projection_margin = f64::INFINITY;
    let mut split_margin = f64::INFINITY;
    for _ in 0..16 {
        let z = random_vector::<S, _>(dict.d(), &mut rng);
        let best = oracle.select(dict, &z, k)?;
        let best_energy = linalg::norm_sq(&model::project_onto_range(dict, &best, &z)?);
        for (_, basis, _) in &bases[k] {
            let energy = linalg::norm_sq(&linalg::project_with_basis(basis, &z));
            projection_margin = projection_margin.min((best_energy - energy) / linalg::norm_sq(&z));
        }
    }
    for _ in 0..64 {
        let x1 = random_vector::<S, _>(dict.d(), &mut rng);
        let x2 = random_vector::<S, _>(dict.d(), &mut rng);
        for c in [0.5, 1.0, 2.0] {
            split_margin = split_margin.min(norm_split_margin(&x1, &x2, c));
        }
    }

    let tol = LEMMA_TOLERANCE * (1.0 + delta);
    let passed = operator_norm_margin >= -tol
        && near_isometry_margin >= -tol
        && (pairs_checked == 0 || cross_margin >= -tol)
        && projection_margin >= -LEMMA_TOLERANCE
        && split_margin >= -LEMMA_TOLERANCE;
    Ok(LemmaReport {
        delta,
        k,
        block_size: dict.block_size(),
        supports_checked,
        pairs_checked,
        operator_norm_margin,
        near_isometry_margin,
        cross_margin,
        projection_margin,
        norm_split_margin: split_margin,
        passed,
    })
}

fn random_vector<S: Scalar, R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<S> {
    DVector::from_fn(len, |_, _| S::standard_normal(rng))
}
