mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use sscosamp::genprob::{self, awgn};
use sscosamp::rip::exact_drip;
use sscosamp::theory::{
    accumulated_noise_factor, check_convergence_condition, epsilon_threshold, iteration_constants,
    noise_projection_bound, oracle_error_bounds, oracle_estimate, t_star, worst_noise_support, EpsilonQuadratic,
    IterationDeltas, NoiseBoundParams,
};
use sscosamp::{Dictionary, SensingMatrix, Support};

/// `ρ(δ)` with all three constants equal to `δ`, written out from the
/// definitions of `ρ₁` and `ρ₂`.
fn rho_oracle(delta: f64, c: f64, ct: f64, gamma: f64) -> f64 {
    let s = delta.sqrt();
    let w = ct.sqrt() / (1.0 + gamma);
    let rho1 = (1.0 + c.sqrt()) / (1.0 - delta * delta).sqrt();
    let inner = w * (1.0 - s) - s;
    rho1 * (1.0 - inner * inner).sqrt()
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn epsilon_threshold_reference_point() {
    let eps = epsilon_threshold(1.0, 1.0, 0.1).unwrap().unwrap();
    assert_close(eps, 0.022519780888618356, 1e-12, "epsilon");
    let q = EpsilonQuadratic::new(1.0, 1.0, 0.1).unwrap();
    let root = bisect(|s| q.eval(s), 0.0, 0.5);
    assert_close(eps, root, 1e-12, "bisection root");
    assert!(q.eval(1.0).abs() < 1e-12, "the quadratic vanishes at s = 1");
    assert!(q.eval(0.5 * eps) < 0.0 && q.eval(0.5) > 0.0);
}

#[test]
fn rho_crosses_one_near_threshold() {
    let eps = epsilon_threshold(1.0, 1.0, 0.1).unwrap().unwrap();
    let at = iteration_constants(IterationDeltas::uniform(eps * eps), 1.0, 1.0, 0.1).unwrap();
    assert!((at.rho - 1.0).abs() < 1e-3, "{}", at.rho);
    let crossing = bisect(|d| rho_oracle(d, 1.0, 1.0, 0.1) - 1.0, 0.0, 0.01);
    assert!((crossing.sqrt() - eps).abs() < 1e-3, "{} vs {eps}", crossing.sqrt());
    let below = iteration_constants(IterationDeltas::uniform(0.25 * eps * eps), 1.0, 1.0, 0.1).unwrap();
    assert!(below.converges());
}

#[test]
fn constants_at_zero_delta() {
    let c = iteration_constants(IterationDeltas::uniform(0.0), 1.0, 1.0, 0.1).unwrap();
    assert_close(c.rho, 2.0 * (1.0 - 1.0 / 1.21_f64).sqrt(), 1e-14, "rho");
    assert_close(c.rho, 0.833196, 1e-6, "rho decimal");
    assert_eq!(c.alpha_proof, 0.0);
    assert_close(c.eta1, 2.0, 1e-15, "eta1");
    assert_close(c.eta2, (10.0 + 10.0 / 1.1_f64).sqrt(), 1e-14, "eta2");
    assert_close(c.eta, c.eta1 + c.rho1 * c.eta2, 1e-15, "eta");
    for ck in [1.0, 1.5, 4.0] {
        let c = iteration_constants(IterationDeltas::uniform(0.0), ck, 0.8, 0.2).unwrap();
        assert_close(c.eta1, 1.0 + ck.sqrt(), 1e-15, "eta1 = 1 + sqrt(C)");
    }
}

#[test]
fn regime_violation_reported() {
    assert!(iteration_constants(IterationDeltas::uniform(0.9), 1.0, 1.0, 0.1).is_err());
    assert!(iteration_constants(IterationDeltas::uniform(1.0), 1.0, 1.0, 0.1).is_err());
    assert!(iteration_constants(IterationDeltas::uniform(0.0), 0.5, 1.0, 0.1).is_err());
}

#[test]
fn convergence_condition_examples() {
    assert!(check_convergence_condition(1.0, 1.0, 0.1).unwrap());
    assert!(!check_convergence_condition(1.0, 0.5, 1e-9).unwrap());
    assert!(!check_convergence_condition(1.1, 0.9, 0.1).unwrap());
    assert_eq!(epsilon_threshold(1.0, 0.5, 1e-9).unwrap(), None);
    assert!(check_convergence_condition(1.0, 1.5, 0.1).is_err());
    assert!(check_convergence_condition(1.0, 1.0, 0.0).is_err());
}

#[test]
fn t_star_examples() {
    assert_eq!(t_star(10.0, 1.0, 0.5).unwrap(), 4);
    assert_eq!(t_star(1.0, 1.0, 0.5).unwrap(), 1);
    assert_eq!(t_star(100.0, 1.0, 0.9).unwrap(), 44);
    assert!(t_star(1.0, 1.0, 1.0).is_err());
    assert_close(accumulated_noise_factor(0.5, 2), 2.5, 1e-15, "noise factor");
}

#[test]
fn noise_bound_closed_form() {
    let p = NoiseBoundParams {
        beta: 1.0,
        zeta: 1.0,
        block_size: 2,
        k: 1,
        n: 100,
        sigma: 0.5,
        delta_3zk: 0.1,
    };
    let expected = (1.1_f64 * 6.0).sqrt() * (1.0 + (4.0 * 100f64.ln()).sqrt()) * 0.5;
    assert_close(noise_projection_bound(&p).unwrap(), expected, 1e-14, "bound");
    assert_close(expected, 6.7976, 1e-4, "bound decimal");
    assert_eq!(noise_projection_bound(&NoiseBoundParams { sigma: 0.0, ..p }).unwrap(), 0.0);
    let doubled = noise_projection_bound(&NoiseBoundParams { sigma: 1.0, ..p }).unwrap();
    assert_close(doubled, 2.0 * expected, 1e-14, "homogeneity");
}

#[test]
fn oracle_identities() {
    let mut r = rng(51, 0);
    let sensing = SensingMatrix::new(gaussian::<Complex64>(10, 8, &mut r)).unwrap();
    let dict = Dictionary::new(gaussian::<Complex64>(8, 12, &mut r), 2).unwrap();
    let coeffs = genprob::clustered_block_coeffs::<Complex64, _>(12, 2, 2, 0, &mut r).unwrap();
    let t = coeffs.support().clone();
    let x = dict.synthesize(coeffs.values()).unwrap();
    let clean = sensing.apply(&x).unwrap();
    assert!((oracle_estimate(&sensing, &dict, &t, &clean).unwrap() - &x).norm() < 1e-10 * x.norm());

    let e = awgn::<Complex64, _>(10, 0.3, &mut r).unwrap();
    let est = oracle_estimate(&sensing, &dict, &t, &(&clean + &e)).unwrap();
    let a = sensing.matrix() * dict.matrix().select_columns(t.atoms());
    let noise_part = dict.matrix().select_columns(t.atoms()) * a.clone().pseudo_inverse(1e-12).unwrap() * &e;
    assert!((&est - &x - noise_part).norm() < 1e-10 * x.norm());

    let scaled = oracle_estimate(&sensing, &dict, &t, &(&e * Complex64::new(0.0, 2.0))).unwrap();
    let base = oracle_estimate(&sensing, &dict, &t, &e).unwrap();
    assert!((scaled - base * Complex64::new(0.0, 2.0)).norm() < 1e-10);

    let id = Dictionary::new(DMatrix::<f64>::identity(5, 5), 1).unwrap();
    let y = gaussian_vec::<f64>(5, &mut r);
    let t = Support::from_atoms([1, 3], 5).unwrap();
    let est = oracle_estimate(&SensingMatrix::identity(5), &id, &t, &y).unwrap();
    assert!((est - DVector::from_vec(vec![0.0, y[1], 0.0, y[3], 0.0])).norm() < 1e-14 * y.norm());
}

#[test]
fn oracle_error_within_band() {
    let (b, k, sigma, d) = (2, 2, 0.2, 8);
    let mut r = rng(52, 0);
    let dict = Dictionary::new(DMatrix::<Complex64>::identity(d, d), b).unwrap();
    let sensing = SensingMatrix::new(DMatrix::<Complex64>::identity(d, d) + gaussian::<Complex64>(d, d, &mut r) * Complex64::new(0.04, 0.0)).unwrap();
    let delta = exact_drip(&sensing, &dict, k, 1_000_000).unwrap().delta;
    assert!(delta > 0.0 && delta < 0.5);
    let (lo, hi) = oracle_error_bounds(b, k, sigma, delta).unwrap();
    let t = Support::from_blocks([0, 3], b, d).unwrap();
    let a = sensing.matrix().select_columns(t.atoms());
    let gram_inv = (a.adjoint() * &a).try_inverse().unwrap();
    let expected = sigma * sigma * gram_inv.trace().re;
    assert!(lo <= expected && expected <= hi, "{lo} <= {expected} <= {hi}");

    let x = DVector::zeros(d);
    let draws = 4000;
    let mean: f64 = (0..draws)
        .map(|_| {
            let e = awgn::<Complex64, _>(d, sigma, &mut r).unwrap();
            (oracle_estimate(&sensing, &dict, &t, &e).unwrap() - &x).norm_squared()
        })
        .sum::<f64>()
        / draws as f64;
    assert!((mean - expected).abs() < 0.05 * expected, "{mean} vs {expected}");
}

#[test]
fn worst_noise_support_examples() {
    let mut r = rng(53, 0);
    let sensing = SensingMatrix::new(gaussian::<f64>(5, 4, &mut r)).unwrap();
    let dict = Dictionary::new(gaussian::<f64>(4, 6, &mut r), 1).unwrap();
    let (s, v) = worst_noise_support(&sensing, &dict, &DVector::zeros(5), 2, 1000).unwrap();
    assert_eq!((s.len(), v), (2, 0.0));

    let e = gaussian_vec::<f64>(5, &mut r);
    let (s, v) = worst_noise_support(&sensing, &dict, &e, 2, 1000).unwrap();
    let me = sensing.matrix().transpose() * &e;
    let best = subsets_colex(6, 2)
        .into_iter()
        .map(|c| gs_project(&gs_basis(&columns(dict.matrix(), &c)), &me).norm())
        .fold(0.0, f64::max);
    assert_close(v, best, 1e-10, "worst value");
    assert_close(gs_project(&gs_basis(&columns(dict.matrix(), s.atoms())), &me).norm(), v, 1e-10, "support value");

    let id = Dictionary::new(DMatrix::<f64>::identity(5, 5), 1).unwrap();
    let e = DVector::from_vec(vec![0.1, -3.0, 0.5, 2.0, -0.2]);
    let (s, v) = worst_noise_support(&SensingMatrix::identity(5), &id, &e, 2, 1000).unwrap();
    assert_eq!(s.atoms(), &[1, 3]);
    assert_close(v, 13f64.sqrt(), 1e-14, "largest entries");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn threshold_is_the_sign_change(c_k in 1.0f64..1.2, c_t in 0.8f64..1.0, gamma in 1e-3f64..0.5) {
        let q = EpsilonQuadratic::new(c_k, c_t, gamma).unwrap();
        match epsilon_threshold(c_k, c_t, gamma).unwrap() {
            Some(eps) => {
                prop_assert!(check_convergence_condition(c_k, c_t, gamma).unwrap());
                prop_assert!(eps > 0.0 && eps < 1.0);
                prop_assert!(q.eval(eps).abs() < 1e-10);
                prop_assert!(q.eval(0.5 * eps) < 0.0);
                prop_assert!(q.eval(0.5 * (eps + 1.0)) > 0.0);
            }
            None => prop_assert!(!check_convergence_condition(c_k, c_t, gamma).unwrap()),
        }
    }

    #[test]
    fn rho_grows_with_delta(d1 in 0.0f64..0.05, d2 in 0.0f64..0.05) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = iteration_constants(IterationDeltas::uniform(lo), 1.0, 1.0, 0.1).unwrap();
        let b = iteration_constants(IterationDeltas::uniform(hi), 1.0, 1.0, 0.1).unwrap();
        prop_assert!(a.rho <= b.rho + 1e-15);
        prop_assert!((a.rho - rho_oracle(lo, 1.0, 1.0, 0.1)).abs() < 1e-12);
    }
}
