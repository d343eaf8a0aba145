//! Computable forms of the recovery guarantees: the oracle estimator, its
//! error band, the convergence condition and its ε-threshold, the
//! iteration-invariant constants `ρ`, `η`, the iteration count `t*` and the
//! high-probability bound on the projected noise.

use crate::combinatorics::{self, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::linalg::{self, IncrementalBasis};
use crate::model::{self, check_len, Dictionary, SensingMatrix, Signal, Support};
use nalgebra::DVector;

/// Default `γ` for diagnostics.
pub const DEFAULT_GAMMA: f64 = 0.1;

/// Least-squares estimate with the true support known in advance, `D_T (M D_T)† y`.
pub fn oracle_estimate<S: Scalar>(
    sensing: &SensingMatrix<S>,
    dict: &Dictionary<S>,
    support: &Support,
    y: &DVector<S>,
) -> Result<Signal<S>> {
    Ok(model::constrained_least_squares(sensing, dict, support, y)?.0)
}

fn check_delta(name: &str, delta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("{name} = {delta} outside [0, 1)")));
    }
    Ok(())
}

/// `(Bkσ²/(1+δ_k), Bkσ²/(1−δ_k))`, the band for the oracle's mean squared error.
pub fn oracle_error_bounds(block_size: usize, k: usize, sigma: f64, delta_k: f64) -> Result<(f64, f64)> {
    check_delta("delta_k", delta_k)?;
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma}")));
    }
    let energy = (block_size * k) as f64 * sigma * sigma;
    Ok((energy / (1.0 + delta_k), energy / (1.0 - delta_k)))
}

fn check_projection_constants(c_k: f64, c_tilde: f64, gamma: f64) -> Result<()> {
    if !(c_k >= 1.0) || !c_k.is_finite() {
        return Err(Error::InvalidParameter(format!("C_k = {c_k} must be at least 1")));
    }
    if !(c_tilde > 0.0 && c_tilde <= 1.0) {
        return Err(Error::InvalidParameter(format!("C~_2k = {c_tilde} outside (0, 1]")));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
    }
    Ok(())
}

/// `(1+√C_k)² (1 − C̃_2k/(1+γ)²) < 1`.
pub fn check_convergence_condition(c_k: f64, c_tilde_2k: f64, gamma: f64) -> Result<bool> {
    check_projection_constants(c_k, c_tilde_2k, gamma)?;
    let lhs = (1.0 + c_k.sqrt()).powi(2) * (1.0 - c_tilde_2k / (1.0 + gamma).powi(2));
    Ok(lhs < 1.0)
}

/// The quadratic `A s² + B s + C` in `s = √δ_{(3ζ+1)k}` whose negativity
/// certifies `ρ < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonQuadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EpsilonQuadratic {
    pub fn new(c_k: f64, c_tilde_2k: f64, gamma: f64) -> Result<Self> {
        check_projection_constants(c_k, c_tilde_2k, gamma)?;
        let u = (1.0 + c_k.sqrt()).powi(2);
        let w = c_tilde_2k.sqrt() / (1.0 + gamma);
        Ok(Self {
            a: 1.0 - u * (w + 1.0).powi(2),
            b: 2.0 * u * (w + 1.0) * w,
            c: 2.0 * c_k.sqrt() + c_k - c_tilde_2k * u / (1.0 + gamma).powi(2),
        })
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.a * s + self.b) * s + self.c
    }

    /// Real roots in ascending order.
    pub fn roots(&self) -> Option<(f64, f64)> {
        let disc = self.b * self.b - 4.0 * self.a * self.c;
        if disc < 0.0 || self.a == 0.0 {
            return None;
        }
        let q = -0.5 * (self.b + self.b.signum() * disc.sqrt());
        let (r1, r2) = (q / self.a, if q != 0.0 { self.c / q } else { 0.0 });
        Some((r1.min(r2), r1.max(r2)))
    }
}

/// `ε` such that `δ_{(3ζ+1)k} ≤ ε²` gives convergence, or `None` when the
/// convergence condition fails.
///
/// The quadratic always vanishes at `s = 1` and opens downward, so when the
/// condition holds its other root lies in `(0, 1)`; that smaller root is `ε`.
pub fn epsilon_threshold(c_k: f64, c_tilde_2k: f64, gamma: f64) -> Result<Option<f64>> {
    if !check_convergence_condition(c_k, c_tilde_2k, gamma)? {
        return Ok(None);
    }
    let q = EpsilonQuadratic::new(c_k, c_tilde_2k, gamma)?;
    Ok(q.roots().map(|(lo, _)| lo).filter(|&r| r > 0.0))
}

/// The three restricted isometry constants entering the iteration invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationDeltas {
    /// `δ_{(3ζ+1)k}`
    pub d_3zp1k: f64,
    /// `δ_{(ζ+1)k}`
    pub d_zp1k: f64,
    /// `δ_{3ζk}`
    pub d_3zk: f64,
}

impl IterationDeltas {
    pub fn uniform(delta: f64) -> Self {
        Self {
            d_3zp1k: delta,
            d_zp1k: delta,
            d_3zk: delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub deltas: IterationDeltas,
    pub c_k: f64,
    pub c_tilde_2k: f64,
    pub gamma: f64,
    pub alpha_proof: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub eta1: f64,
    pub eta2: f64,
    /// `ρ = ρ₁ρ₂`
    pub rho: f64,
    /// `η = η₁ + ρ₁η₂`
    pub eta: f64,
}

impl TheoryConstants {
    pub fn converges(&self) -> bool {
        self.rho < 1.0
    }
}

pub fn iteration_constants(deltas: IterationDeltas, c_k: f64, c_tilde_2k: f64, gamma: f64) -> Result<TheoryConstants> {
    check_projection_constants(c_k, c_tilde_2k, gamma)?;
    check_delta("delta_(3z+1)k", deltas.d_3zp1k)?;
    check_delta("delta_(z+1)k", deltas.d_zp1k)?;
    check_delta("delta_3zk", deltas.d_3zk)?;
    let s_big = deltas.d_3zp1k.sqrt();
    let s_small = deltas.d_zp1k.sqrt();
    let w = c_tilde_2k.sqrt() / (1.0 + gamma);

    let alpha_den = w * (1.0 - s_small) - s_big;
    if !(alpha_den > 0.0) {
        return Err(Error::RegimeViolation(format!(
            "alpha denominator {alpha_den} is not positive"
        )));
    }
    let alpha = s_big / alpha_den;

    let rho1 = ((1.0 + c_k.sqrt()).powi(2) / (1.0 - deltas.d_3zp1k.powi(2))).sqrt();
    let rho2 = (1.0 - (s_big - w * (1.0 - s_small)).powi(2)).max(0.0).sqrt();
    let eta1 = (1.0 + c_k.sqrt()) / (1.0 - deltas.d_3zp1k);
    let eta2 = ((1.0 + deltas.d_3zk) / (gamma * (1.0 + alpha))
        + (1.0 + deltas.d_zp1k) * c_tilde_2k / (gamma * (1.0 + alpha) * (1.0 + gamma)))
        .sqrt();
    Ok(TheoryConstants {
        deltas,
        c_k,
        c_tilde_2k,
        gamma,
        alpha_proof: alpha,
        rho1,
        rho2,
        eta1,
        eta2,
        rho: rho1 * rho2,
        eta: eta1 + rho1 * eta2,
    })
}

/// `⌈log(‖x‖/‖e‖) / log(1/ρ)⌉`, clamped to at least 1.
pub fn t_star(norm_x: f64, norm_e: f64, rho: f64) -> Result<usize> {
    if rho >= 1.0 {
        return Err(Error::NoConvergence(format!("rho = {rho} is not below 1")));
    }
    if !(rho > 0.0) || !(norm_e > 0.0) || !(norm_x >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_star needs 0 < rho < 1 and positive norms (rho = {rho}, |e| = {norm_e})"
        )));
    }
    if norm_x == 0.0 {
        return Ok(1);
    }
    let t = ((norm_x / norm_e).ln() / (1.0 / rho).ln()).ceil();
    Ok(if t < 1.0 { 1 } else { t as usize })
}

/// `1 + (1 − ρ^t)/(1 − ρ)`: the factor multiplying `η‖P_{T_e} M* e‖₂` after `t` iterations.
pub fn accumulated_noise_factor(rho: f64, t: usize) -> f64 {
    1.0 + (1.0 - rho.powi(t as i32)) / (1.0 - rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBoundParams {
    pub beta: f64,
    pub zeta: f64,
    pub block_size: usize,
    pub k: usize,
    pub n: usize,
    pub sigma: f64,
    pub delta_3zk: f64,
}

/// `√((1+δ_{3ζk})·3ζBk) · (1 + √(2(1+β) log n)) · σ`.
pub fn noise_projection_bound(p: &NoiseBoundParams) -> Result<f64> {
    if !(p.beta > 0.0) || !(p.zeta >= 1.0) || p.k == 0 || p.block_size == 0 || p.n < 1 || !(p.sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("invalid noise bound parameters {p:?}")));
    }
    check_delta("delta_3zk", p.delta_3zk)?;
    let dim = 3.0 * p.zeta * (p.block_size * p.k) as f64;
    let spread = 1.0 + (2.0 * (1.0 + p.beta) * (p.n as f64).ln()).sqrt();
    Ok(((1.0 + p.delta_3zk) * dim).sqrt() * spread * p.sigma)
}

/// The probability with which [`noise_projection_bound`] is guaranteed,
/// `1 − 2 n^{−β} / (3ζBk)!`.
pub fn noise_bound_probability(p: &NoiseBoundParams) -> f64 {
    let size = (3.0 * p.zeta * (p.block_size * p.k) as f64).round() as u32;
    let log_fact: f64 = (1..=size).map(|i| (i as f64).ln()).sum();
    1.0 - 2.0 * (-(p.beta) * (p.n as f64).ln() - log_fact).exp()
}

/// Exhaustive maximiser of `‖P_T M* e‖₂` over unstructured supports of `size` atoms.
pub fn worst_noise_support<S: Scalar>(
    sensing: &SensingMatrix<S>,
    dict: &Dictionary<S>,
    noise: &DVector<S>,
    size: usize,
    cap: u64,
) -> Result<(Support, f64)> {
    check_len("worst_noise_support: M columns vs d", dict.d(), sensing.d())?;
    let v = sensing.adjoint_apply(noise)?;
    let size = size.min(dict.n());
    let tie = 1e-12 * linalg::norm_sq(&v).max(f64::MIN_POSITIVE);
    let (value, atoms) = combinatorics::par_map_reduce(
        dict.n(),
        size,
        cap,
        |atoms| {
            let mut basis = IncrementalBasis::new(dict.d());
            for &a in atoms {
                basis.push(&dict.matrix().column(a).into_owned());
            }
            (linalg::norm_sq(&basis.project(&v)), atoms.to_vec())
        },
        |left, right| if right.0 > left.0 + tie { right } else { left },
    )?
    .expect("at least one candidate support");
    Ok((Support::from_atoms(atoms, dict.n())?, value.sqrt()))
}

/// [`worst_noise_support`] with the default enumeration cap.
pub fn worst_noise_value<S: Scalar>(
    sensing: &SensingMatrix<S>,
    dict: &Dictionary<S>,
    noise: &DVector<S>,
    size: usize,
) -> Result<f64> {
    Ok(worst_noise_support(sensing, dict, noise, size, DEFAULT_ENUMERATION_CAP)?.1)
}

/// Informational only: `(C/ε²)(k log(n/(kε)) + Bk log(1/ε))`, the order of
/// measurements under which random ensembles satisfy the block D-RIP.
pub fn measurement_estimate(constant: f64, epsilon: f64, k: usize, n: usize, block_size: usize) -> f64 {
    let k = k as f64;
    constant / (epsilon * epsilon)
        * (k * (n as f64 / (k * epsilon)).ln() + block_size as f64 * k * (1.0 / epsilon).ln())
}
