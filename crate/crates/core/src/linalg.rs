//! Dense kernels shared by the projection, least-squares and RIP code.
//!
//! All rank decisions use a singular-value cutoff of [`RANK_RTOL`] times the
//! largest singular value; directions below it are dropped, which yields
//! minimum-norm least-squares solutions and projections onto the numerical
//! column span.

use crate::field::Scalar;
use nalgebra::{DMatrix, DVector};

pub const RANK_RTOL: f64 = 1e-10;

fn cutoff(singular_values: &DVector<f64>) -> f64 {
    RANK_RTOL * singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Orthonormal basis for the numerical column span of `a`.
pub fn range_basis<S: Scalar>(a: &DMatrix<S>) -> DMatrix<S> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let tol = cutoff(&svd.singular_values);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol && s > 0.0)
        .map(|(i, _)| i)
        .collect();
    u.select_columns(keep.iter())
}

/// Minimum-norm solution of `min ‖b − a x‖₂`.
pub fn min_norm_solve<S: Scalar>(a: &DMatrix<S>, b: &DVector<S>) -> DVector<S> {
    assert_eq!(a.nrows(), b.len(), "min_norm_solve: row mismatch");
    if a.ncols() == 0 || a.nrows() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let tol = cutoff(&svd.singular_values);
    if tol == 0.0 {
        return DVector::zeros(a.ncols());
    }
    svd.solve(b, tol)
        .expect("singular vectors requested")
        .column(0)
        .into_owned()
}

/// `Q Q* z` for a matrix `Q` with orthonormal columns.
pub fn project_with_basis<S: Scalar>(basis: &DMatrix<S>, z: &DVector<S>) -> DVector<S> {
    if basis.ncols() == 0 {
        return DVector::zeros(z.len());
    }
    basis * basis.ad_mul(z)
}

pub fn singular_values<S: Scalar>(a: &DMatrix<S>) -> DVector<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DVector::zeros(0);
    }
    a.clone().svd(false, false).singular_values
}

/// Largest singular value (operator 2-norm).
pub fn spectral_norm<S: Scalar>(a: &DMatrix<S>) -> f64 {
    singular_values(a).iter().cloned().fold(0.0, f64::max)
}

pub fn norm_sq<S: Scalar>(v: &DVector<S>) -> f64 {
    v.iter().map(|x| x.modulus_squared()).sum()
}

/// Orthonormal basis grown one column at a time by Gram-Schmidt with one
/// reorthogonalisation pass. Columns already in the span (relative residual
/// at most [`RANK_RTOL`]) are skipped, so the basis always spans exactly the
/// numerical range of the columns pushed so far.
#[derive(Debug, Clone)]
pub struct IncrementalBasis<S: Scalar> {
    dim: usize,
    vectors: Vec<DVector<S>>,
}

impl<S: Scalar> IncrementalBasis<S> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    fn orthogonalize(&self, v: &mut DVector<S>) {
        for _ in 0..2 {
            for q in &self.vectors {
                let c = q.dotc(v);
                v.axpy(-c, q, S::one());
            }
        }
    }

    /// Adds a column; returns `false` if it was numerically dependent.
    pub fn push(&mut self, column: &DVector<S>) -> bool {
        assert_eq!(column.len(), self.dim);
        let scale = column.norm();
        if scale == 0.0 {
            return false;
        }
        let mut v = column.clone();
        self.orthogonalize(&mut v);
        let r = v.norm();
        if r <= RANK_RTOL * scale {
            return false;
        }
        v.unscale_mut(r);
        self.vectors.push(v);
        true
    }

    pub fn project(&self, z: &DVector<S>) -> DVector<S> {
        let mut out = DVector::zeros(self.dim);
        for q in &self.vectors {
            let c = q.dotc(z);
            out.axpy(c, q, S::one());
        }
        out
    }

    /// `z − P z`, computed by sequential orthogonalisation.
    pub fn residual(&self, z: &DVector<S>) -> DVector<S> {
        let mut r = z.clone();
        self.orthogonalize(&mut r);
        r
    }
}
