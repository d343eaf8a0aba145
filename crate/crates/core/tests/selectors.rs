mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use sscosamp::combinatorics::DEFAULT_ENUMERATION_CAP;
use sscosamp::genprob::{self, overcomplete_dft};
use sscosamp::selectors::{
    epsilon_block_extension, estimate_near_optimality, Bomp, EpsBomp, Omp, OptimalBruteforce, SupportSelector,
    Thresholding,
};
use sscosamp::{Dictionary, Scalar, Support};

fn residual_energy<S: Scalar>(dict: &Dictionary<S>, t: &Support, z: &DVector<S>) -> f64 {
    (z - gs_project(&gs_basis(&columns(dict.matrix(), t.atoms())), z)).norm_squared()
}

#[test]
fn optimal_on_orthonormal_basis() {
    let id = Dictionary::new(DMatrix::<f64>::identity(3, 3), 1).unwrap();
    let z = DVector::from_vec(vec![3.0, 1.0, 2.0]);
    let s = OptimalBruteforce::default().select(&id, &z, 1).unwrap();
    assert_eq!(s.atoms(), &[0]);

    let mut r = rng(21, 0);
    for k in 1..=4 {
        let q = orthonormal::<Complex64>(6, &mut r);
        let dict = Dictionary::new(q.clone(), 1).unwrap();
        let z = gaussian_vec::<Complex64>(6, &mut r);
        let corr = q.ad_mul(&z);
        let mut order: Vec<usize> = (0..6).collect();
        order.sort_by(|&a, &b| corr[b].norm().total_cmp(&corr[a].norm()));
        let mut top = order[..k].to_vec();
        top.sort_unstable();
        assert_eq!(OptimalBruteforce::default().select(&dict, &z, k).unwrap().atoms(), &top[..]);
    }
}

#[test]
fn optimal_matches_second_enumeration() {
    for seed in 0..5 {
        let mut r = rng(22, seed);
        let dict = Dictionary::new(gaussian::<f64>(6, 8, &mut r), 1).unwrap();
        let z = gaussian_vec::<f64>(6, &mut r);
        let (best, energy) = OptimalBruteforce::default().select_with_residual(&dict, &z, 2).unwrap();
        let mut oracle: Option<(f64, Vec<usize>)> = None;
        let candidates = subsets_colex(8, 2);
        assert_eq!(candidates.len(), 28);
        for c in candidates {
            let e = residual_energy(&dict, &Support::from_atoms(c.clone(), 8).unwrap(), &z);
            if oracle.as_ref().is_none_or(|(b, _)| e < *b) {
                oracle = Some((e, c));
            }
        }
        let (e, c) = oracle.unwrap();
        assert_eq!(best.atoms(), &c[..]);
        assert_close(energy, e, 1e-10, "optimal residual");
    }
}

#[test]
fn thresholding_ties_go_to_lowest_index() {
    let mut r = rng(23, 0);
    let dict = Dictionary::new(gaussian::<f64>(5, 12, &mut r), 3).unwrap();
    let s = Thresholding.select(&dict, &DVector::zeros(5), 2).unwrap();
    assert_eq!(s.atoms(), &[0, 1, 2, 3, 4, 5]);

    let col = gaussian_vec::<f64>(4, &mut r);
    let a = DMatrix::from_columns(&[col.clone(), col.clone()]);
    let coherent = Dictionary::new(a, 1).unwrap();
    assert_eq!(Thresholding.select(&coherent, &col, 1).unwrap().atoms(), &[0]);
    assert_eq!(Omp.select(&coherent, &col, 1).unwrap().atoms(), &[0]);
    assert_eq!(OptimalBruteforce::default().select(&coherent, &col, 1).unwrap().atoms(), &[0]);
}

#[test]
fn omp_recovers_incoherent_support() {
    let mut r = rng(24, 0);
    let a = DMatrix::<f64>::identity(10, 10) + gaussian::<f64>(10, 10, &mut r) * 1e-3;
    let dict = Dictionary::new(a.clone(), 1).unwrap();
    let t = [1usize, 4, 8];
    let coef = [1.0, -0.7, 0.4];
    let z = t.iter().zip(coef).fold(DVector::zeros(10), |acc, (&j, c)| acc + a.column(j) * c);
    let s = Omp.select(&dict, &z, 3).unwrap();
    assert_eq!(s.atoms(), &t);
    assert!(residual_energy(&dict, &s, &z) < 1e-20);
    assert!(Omp.select(&dict, &z, 0).unwrap().is_empty());
}

#[test]
fn bomp_single_block_of_orthonormal_basis() {
    let mut r = rng(25, 0);
    let q = orthonormal::<f64>(12, &mut r);
    let dict = Dictionary::new(q.clone(), 3).unwrap();
    let z = q.column(6) * 0.3 + q.column(7) * -1.2 + q.column(8) * 0.5;
    assert_eq!(Bomp.select(&dict, &z, 1).unwrap().atoms(), &[6, 7, 8]);
}

/// Straightforward BOMP: score blocks by summed squared normalised
/// correlations with the residual, project with Gram-Schmidt.
fn bomp_reference<S: Scalar>(dict: &Dictionary<S>, z: &DVector<S>, k: usize) -> Vec<usize> {
    let b = dict.block_size();
    let mut chosen: Vec<usize> = Vec::new();
    let mut residual = z.clone();
    for _ in 0..k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for blk in 0..dict.num_blocks() {
            if chosen.contains(&blk) {
                continue;
            }
            let score: f64 = (blk * b..(blk + 1) * b)
                .map(|l| {
                    let d = dict.matrix().column(l).into_owned();
                    dot(&d, &residual).modulus_squared() / d.norm_squared()
                })
                .sum();
            if score > best.1 {
                best = (blk, score);
            }
        }
        chosen.push(best.0);
        let atoms: Vec<usize> = chosen.iter().flat_map(|&c| c * b..(c + 1) * b).collect();
        residual = z - gs_project(&gs_basis(&columns(dict.matrix(), &atoms)), z);
    }
    chosen
}

#[test]
fn bomp_matches_reference_and_first_step_scores() {
    for seed in 0..10 {
        let mut r = rng(26, seed);
        let dict = Dictionary::new(gaussian::<Complex64>(16, 32, &mut r), 4).unwrap();
        let z = gaussian_vec::<Complex64>(16, &mut r);
        let got = Bomp.select(&dict, &z, 2).unwrap();
        let reference = bomp_reference(&dict, &z, 2);
        assert_eq!(got, Support::from_blocks(reference.clone(), 4, 32).unwrap());
        let first = Bomp.select(&dict, &z, 1).unwrap();
        assert_eq!(first.blocks(4), vec![reference[0]]);
    }
}

#[test]
fn extension_examples() {
    let mut r = rng(27, 0);
    let dict = Dictionary::new(gaussian::<f64>(6, 12, &mut r), 3).unwrap();
    let t = Support::from_atoms([1, 7], 12).unwrap();
    let ext = epsilon_block_extension(&dict, &t, 0.0).unwrap();
    assert_eq!(ext.blocks(3), vec![0, 2]);

    let mut a = gaussian::<f64>(6, 8, &mut r);
    let c0 = a.column(0).into_owned();
    a.set_column(5, &c0);
    let dup = Dictionary::new(a, 2).unwrap();
    for eps in [0.0, 0.1, 0.3] {
        let ext = epsilon_block_extension(&dup, &Support::from_atoms([0], 8).unwrap(), eps).unwrap();
        assert_eq!(ext.blocks(2), vec![0, 2]);
    }
}

#[test]
fn extension_on_overcomplete_dft_matches_gram_row() {
    let eps = 0.1_f64.sqrt();
    let dict = overcomplete_dft(32, 4, 4).unwrap();
    let a = dict.matrix();
    for j in [0usize, 5, 37, 127] {
        let dj = a.column(j).into_owned();
        let mut expected: Vec<usize> = (0..dict.n())
            .filter(|&l| {
                let dl = a.column(l).into_owned();
                let c = dot(&dl, &dj).norm_sqr() / (dl.norm_squared() * dj.norm_squared());
                c >= 1.0 - eps * eps
            })
            .map(|l| l / 4)
            .collect();
        expected.dedup();
        let ext = epsilon_block_extension(&dict, &Support::from_atoms([j], dict.n()).unwrap(), eps).unwrap();
        assert_eq!(ext.blocks(4), expected, "atom {j}");
    }
    // adjacent atoms correlate at sinc²(1/4) ≈ 0.81, below the 0.9 cut
    let c = dot(&a.column(0).into_owned(), &a.column(1).into_owned()).norm_sqr();
    assert!((c - 0.81).abs() < 0.01, "{c}");
}

#[test]
fn eps_bomp_reductions() {
    for seed in 0..10 {
        let mut r = rng(28, seed);
        let dict = Dictionary::new(gaussian::<Complex64>(10, 20, &mut r), 4).unwrap();
        let z = gaussian_vec::<Complex64>(10, &mut r);
        let eps = EpsBomp::new(0.0).unwrap();
        assert_eq!(eps.select(&dict, &z, 2).unwrap(), Bomp.select(&dict, &z, 2).unwrap());
        let unit = dict.with_block_size(1).unwrap();
        assert_eq!(eps.select(&unit, &z, 3).unwrap(), Omp.select(&unit, &z, 3).unwrap());
        assert_eq!(Bomp.select(&unit, &z, 3).unwrap(), Omp.select(&unit, &z, 3).unwrap());
    }
}

#[test]
fn eps_bomp_against_brute_force_on_dft_clusters() {
    let dict = overcomplete_dft(32, 4, 4).unwrap();
    let eps = EpsBomp::new(0.1_f64.sqrt()).unwrap();
    let oracle = OptimalBruteforce::default();
    let (mut eps_hits, mut opt_hits, mut inflation) = (0, 0, 0usize);
    for t in 0..100 {
        let mut r = rng(29, t);
        let coeffs = genprob::clustered_block_coeffs::<Complex64, _>(128, 4, 2, 1, &mut r).unwrap();
        let z = dict.synthesize(coeffs.values()).unwrap();
        let truth = coeffs.support().blocks(4);
        let out = eps.select_with_outcome(&dict, &z, 2).unwrap();
        let chosen = out.support.blocks(4);
        eps_hits += usize::from(truth.iter().all(|b| chosen.contains(b)));
        inflation = inflation.max(out.inflation);
        let opt = oracle.select(&dict, &z, 2).unwrap().blocks(4);
        opt_hits += usize::from(opt == truth);
    }
    assert_eq!(opt_hits, 100, "brute force finds the true blocks of a noiseless signal");
    assert!(eps_hits >= 60, "eps-bomp contained the true blocks in {eps_hits}/100 trials");
    assert!(inflation >= 1);
}

#[test]
fn near_optimality_orthonormal_and_coherent() {
    let mut r = rng(30, 0);
    let dict = Dictionary::new(orthonormal::<f64>(8, &mut r), 1).unwrap();
    for sel in [&Thresholding as &dyn SupportSelector<f64>, &Omp] {
        let rep = estimate_near_optimality(sel, &dict, 3, 50, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!((rep.c_hat - 1.0).abs() < 1e-9 && (rep.c_tilde_hat - 1.0).abs() < 1e-9, "{rep:?}");
    }
    let coherent = Dictionary::new(gaussian::<f64>(8, 16, &mut r), 1).unwrap();
    let rep = estimate_near_optimality(&Omp, &coherent, 2, 500, 2, DEFAULT_ENUMERATION_CAP).unwrap();
    assert!(rep.c_hat.is_finite() && rep.c_hat >= 1.0, "{rep:?}");
    assert!(rep.c_tilde_hat.is_finite() && rep.c_tilde_hat <= 1.0, "{rep:?}");
    assert_eq!((rep.trials, rep.skipped), (500, 0));
}

#[test]
fn infeasible_brute_force_is_reported() {
    let dict = overcomplete_dft(16, 4, 1).unwrap();
    let z = DVector::from_element(16, Complex64::new(1.0, 0.0));
    let err = OptimalBruteforce { cap: 100 }.select(&dict, &z, 3).unwrap_err();
    assert!(matches!(err, sscosamp::Error::InfeasibleBruteforce { .. }), "{err}");
}

fn selector_invariants<S: Scalar>(seed: u64, d: usize, blocks: usize, b: usize, k: usize) {
    let mut r = rng(31, seed);
    let dict = Dictionary::new(gaussian::<S>(d, blocks * b, &mut r), b).unwrap();
    let z = gaussian_vec::<S>(d, &mut r);
    let k = k.min(blocks);
    let oracle = OptimalBruteforce::default();
    let (opt, opt_res) = oracle.select_with_residual(&dict, &z, k).unwrap();
    let opt_cap = z.norm_squared() - opt_res;
    let sels: Vec<Box<dyn SupportSelector<S>>> =
        vec![Box::new(Thresholding), Box::new(Bomp), Box::new(EpsBomp::new(0.3).unwrap()), Box::new(oracle)];
    for sel in &sels {
        let s = sel.select(&dict, &z, k).unwrap();
        assert_eq!(s, sel.select(&dict, &z, k).unwrap(), "determinism");
        assert!(s.is_union_of_blocks(b), "{} alignment", sel.name());
        if sel.name() != "eps-bomp" {
            assert_eq!(s.block_count(b), k, "{} size", sel.name());
            let res = residual_energy(&dict, &s, &z);
            let tol = 1e-9 * z.norm_squared();
            assert!(res >= opt_res - tol, "{} beats the optimum", sel.name());
            assert!(z.norm_squared() - res <= opt_cap + tol);
        }
    }
    assert_eq!(opt.block_count(b), k);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants_hold(seed in any::<u64>(), d in 2usize..7, blocks in 1usize..7, b in 1usize..3,
                       k in 1usize..4, complex in any::<bool>()) {
        if complex {
            selector_invariants::<Complex64>(seed, d, blocks, b, k);
        } else {
            selector_invariants::<f64>(seed, d, blocks, b, k);
        }
    }

    #[test]
    fn bomp_with_unit_blocks_is_omp(seed in any::<u64>(), d in 2usize..9, n in 2usize..14, k in 1usize..5) {
        let mut r = rng(32, seed);
        let dict = Dictionary::new(gaussian::<f64>(d, n, &mut r), 1).unwrap();
        let z = gaussian_vec::<f64>(d, &mut r);
        let k = k.min(n);
        let omp = Omp.select(&dict, &z, k).unwrap();
        prop_assert_eq!(&Bomp.select(&dict, &z, k).unwrap(), &omp);
        prop_assert_eq!(&EpsBomp::new(0.0).unwrap().select(&dict, &z, k).unwrap(), &omp);
    }
}
