//! Signal Space CoSaMP for signals that are sparse, or block-sparse, in an
//! arbitrary and possibly redundant dictionary.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`] and [`linalg`]: scalar abstraction over `f64` / `Complex64`
//!   and the dense kernels (orthonormal range bases, minimum-norm least
//!   squares) everything else is built on.
//! * [`model`]: dictionaries, sensing matrices, supports and the projection
//!   operators `P_T`, `Q_T`.
//! * [`selectors`]: support-selection schemes (thresholding, OMP, block OMP,
//!   ε-block OMP) and the brute-force optimal projection used as an oracle.
//! * [`solver`]: the SSCoSaMP loop, block and non-block.
//! * [`theory`]: oracle estimator and the closed-form convergence constants.
//! * [`rip`]: exact and sampled D-RIP constants plus lemma checks.
//! * [`genprob`]: seeded generators for the experimental ensemble.

pub mod combinatorics;
pub mod error;
pub mod field;
pub mod genprob;
pub mod linalg;
pub mod model;
pub mod rip;
pub mod selectors;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
pub use field::{Field, Scalar};
pub use model::{Dictionary, SensingMatrix, Signal, SparseCoefficients, Support};
