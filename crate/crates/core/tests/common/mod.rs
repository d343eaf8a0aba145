//! Test helpers: seeded random matrices and an independent Gram-Schmidt
//! projection oracle.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use sscosamp::genprob::ExperimentSeed;
use sscosamp::Scalar;

pub fn rng(seed: u64, stream: u64) -> impl Rng {
    ExperimentSeed::new(seed, stream).rng()
}

pub fn gaussian<S: Scalar>(rows: usize, cols: usize, r: &mut impl Rng) -> DMatrix<S> {
    DMatrix::from_fn(rows, cols, |_, _| S::standard_normal(r))
}

pub fn gaussian_vec<S: Scalar>(len: usize, r: &mut impl Rng) -> DVector<S> {
    DVector::from_fn(len, |_, _| S::standard_normal(r))
}

pub fn orthonormal<S: Scalar>(d: usize, r: &mut impl Rng) -> DMatrix<S> {
    gaussian::<S>(d, d, r).qr().q()
}

/// `Σ conj(a_i) b_i`, written out by hand.
pub fn dot<S: Scalar>(a: &DVector<S>, b: &DVector<S>) -> S {
    a.iter().zip(b.iter()).fold(S::zero(), |acc, (x, y)| acc + x.conjugate() * *y)
}

/// Modified Gram-Schmidt with re-orthogonalisation; columns whose residual
/// falls below `1e-9` of their norm are dropped.
pub fn gs_basis<S: Scalar>(columns: &[DVector<S>]) -> Vec<DVector<S>> {
    let mut basis: Vec<DVector<S>> = Vec::new();
    for c in columns {
        let mut v = c.clone();
        for _ in 0..2 {
            for q in &basis {
                let coef = dot(q, &v);
                v -= q * coef;
            }
        }
        let norm = dot(&v, &v).real().sqrt();
        if norm > 1e-9 * c.norm().max(f64::MIN_POSITIVE) {
            basis.push(v.unscale(norm));
        }
    }
    basis
}

pub fn gs_project<S: Scalar>(basis: &[DVector<S>], z: &DVector<S>) -> DVector<S> {
    let mut p = DVector::zeros(z.len());
    for q in basis {
        p += q * dot(q, z);
    }
    p
}

pub fn columns<S: Scalar>(m: &DMatrix<S>, idx: &[usize]) -> Vec<DVector<S>> {
    idx.iter().map(|&j| m.column(j).into_owned()).collect()
}

/// All `k`-subsets of `0..n` in colexicographic order (a different order
/// from the library's lexicographic enumeration).
pub fn subsets_colex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).filter(|i| mask >> i & 1 == 1).collect());
        }
    }
    out
}

pub fn assert_close(a: f64, b: f64, rel: f64, what: &str) {
    let scale = a.abs().max(b.abs()).max(1.0);
    assert!((a - b).abs() <= rel * scale, "{what}: {a} vs {b}");
}
