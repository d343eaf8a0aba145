//! Dictionaries, sensing matrices, supports and the projection operators.

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use std::ops::Range;
use std::sync::Arc;

/// A signal-domain vector of length `d`.
pub type Signal<S> = DVector<S>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// A `d × n` synthesis dictionary with an optional block partition of width `B`.
///
/// The atom matrix is reference counted, so re-blocking a dictionary with
/// [`Dictionary::with_block_size`] does not copy it.
#[derive(Debug, Clone)]
pub struct Dictionary<S: Scalar> {
    atoms: Arc<DMatrix<S>>,
    column_norms: Arc<Vec<f64>>,
    block_size: usize,
}

impl<S: Scalar> Dictionary<S> {
    pub fn new(atoms: DMatrix<S>, block_size: usize) -> Result<Self> {
        let (d, n) = atoms.shape();
        if d == 0 || n == 0 {
            return Err(Error::InvalidDictionary(format!("empty {d}x{n} dictionary")));
        }
        let column_norms: Vec<f64> = atoms.column_iter().map(|c| c.norm()).collect();
        if let Some(j) = column_norms.iter().position(|v| !v.is_finite() || *v == 0.0) {
            return Err(Error::InvalidDictionary(format!(
                "column {j} has zero or non-finite norm"
            )));
        }
        let dict = Self {
            atoms: Arc::new(atoms),
            column_norms: Arc::new(column_norms),
            block_size: 1,
        };
        dict.with_block_size(block_size)
    }

    /// Same atoms, different block partition.
    pub fn with_block_size(&self, block_size: usize) -> Result<Self> {
        if block_size == 0 || self.n() % block_size != 0 {
            return Err(Error::InvalidDictionary(format!(
                "block size {block_size} does not divide n = {}",
                self.n()
            )));
        }
        Ok(Self {
            atoms: Arc::clone(&self.atoms),
            column_norms: Arc::clone(&self.column_norms),
            block_size,
        })
    }

    pub fn d(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn n(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn num_blocks(&self) -> usize {
        self.n() / self.block_size
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.atoms
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        self.column_norms[j]
    }

    /// `D α`.
    pub fn synthesize(&self, coeffs: &DVector<S>) -> Result<Signal<S>> {
        check_len("Dictionary::synthesize", self.n(), coeffs.len())?;
        Ok(&*self.atoms * coeffs)
    }

    /// `D* z`.
    pub fn analyze(&self, z: &Signal<S>) -> Result<DVector<S>> {
        check_len("Dictionary::analyze", self.d(), z.len())?;
        Ok(self.atoms.ad_mul(z))
    }

    pub fn block_atoms(&self, block: usize) -> Result<Range<usize>> {
        block_atoms(block, self.block_size, self.n())
    }
}

/// An `m × d` measurement operator.
#[derive(Debug, Clone)]
pub struct SensingMatrix<S: Scalar> {
    entries: DMatrix<S>,
}

impl<S: Scalar> SensingMatrix<S> {
    pub fn new(entries: DMatrix<S>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidSensingMatrix(format!(
                "empty {}x{} matrix",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSensingMatrix("non-finite entry".into()));
        }
        Ok(Self { entries })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(DMatrix::identity(d, d)).expect("identity is a valid sensing matrix")
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn d(&self) -> usize {
        self.entries.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.entries
    }

    /// `M x`.
    pub fn apply(&self, x: &Signal<S>) -> Result<DVector<S>> {
        check_len("SensingMatrix::apply", self.d(), x.len())?;
        Ok(&self.entries * x)
    }

    /// `M* y`.
    pub fn adjoint_apply(&self, y: &DVector<S>) -> Result<Signal<S>> {
        check_len("SensingMatrix::adjoint_apply", self.m(), y.len())?;
        Ok(self.entries.ad_mul(y))
    }
}

/// A sorted, duplicate-free set of atom indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Support {
    atoms: Vec<usize>,
    block_aligned: bool,
}

impl Support {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds an unstructured support; input order and duplicates are irrelevant.
    pub fn from_atoms(atoms: impl IntoIterator<Item = usize>, n: usize) -> Result<Self> {
        let mut atoms: Vec<usize> = atoms.into_iter().collect();
        if let Some(&bad) = atoms.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidSupport { index: bad, n });
        }
        atoms.sort_unstable();
        atoms.dedup();
        Ok(Self {
            atoms,
            block_aligned: false,
        })
    }

    /// The union of whole blocks `[iB, (i+1)B)` for each listed block `i`.
    pub fn from_blocks(blocks: impl IntoIterator<Item = usize>, block_size: usize, n: usize) -> Result<Self> {
        let mut atoms = Vec::new();
        for b in blocks {
            atoms.extend(block_atoms(b, block_size, n)?);
        }
        let mut s = Self::from_atoms(atoms, n)?;
        s.block_aligned = true;
        Ok(s)
    }

    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_block_aligned(&self) -> bool {
        self.block_aligned
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.atoms.binary_search(&atom).is_ok()
    }

    pub fn union(&self, other: &Support) -> Support {
        let mut atoms = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.atoms.len() || j < other.atoms.len() {
            let next = match (self.atoms.get(i), other.atoms.get(j)) {
                (Some(&a), Some(&b)) if a == b => {
                    i += 1;
                    j += 1;
                    a
                }
                (Some(&a), Some(&b)) if a < b => {
                    i += 1;
                    a
                }
                (Some(_), Some(&b)) => {
                    j += 1;
                    b
                }
                (Some(&a), None) => {
                    i += 1;
                    a
                }
                (None, Some(&b)) => {
                    j += 1;
                    b
                }
                (None, None) => unreachable!(),
            };
            atoms.push(next);
        }
        let block_aligned = (self.block_aligned || self.is_empty()) && (other.block_aligned || other.is_empty());
        Support {
            atoms,
            block_aligned,
        }
    }

    /// Distinct blocks touched by this support, ascending.
    pub fn blocks(&self, block_size: usize) -> Vec<usize> {
        let mut blocks: Vec<usize> = self.atoms.iter().map(|a| a / block_size).collect();
        blocks.dedup();
        blocks
    }

    pub fn block_count(&self, block_size: usize) -> usize {
        self.blocks(block_size).len()
    }

    /// True when the atom set is exactly a union of whole blocks.
    pub fn is_union_of_blocks(&self, block_size: usize) -> bool {
        self.atoms.len() == self.block_count(block_size) * block_size
    }
}

/// Coefficients `α` of length `n`, vanishing off `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoefficients<S: Scalar> {
    values: DVector<S>,
    support: Support,
}

impl<S: Scalar> SparseCoefficients<S> {
    pub fn new(values: DVector<S>, support: Support) -> Result<Self> {
        let n = values.len();
        if let Some(&bad) = support.atoms().iter().find(|&&i| i >= n) {
            return Err(Error::InvalidSupport { index: bad, n });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_zero() && !support.contains(i) {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {i} is nonzero outside the support"
                )));
            }
        }
        Ok(Self { values, support })
    }

    /// Scatters `restricted` (one value per atom of `support`, in order) into a length-`n` vector.
    pub fn scatter(n: usize, support: Support, restricted: &DVector<S>) -> Result<Self> {
        check_len("SparseCoefficients::scatter", support.len(), restricted.len())?;
        let mut values = DVector::zeros(n);
        for (&atom, v) in support.atoms().iter().zip(restricted.iter()) {
            if atom >= n {
                return Err(Error::InvalidSupport { index: atom, n });
            }
            values[atom] = *v;
        }
        Ok(Self { values, support })
    }

    pub fn values(&self) -> &DVector<S> {
        &self.values
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }
}

/// Atom range of block `block` for width `block_size` over `n` atoms.
pub fn block_atoms(block: usize, block_size: usize, n: usize) -> Result<Range<usize>> {
    if block_size == 0 || n % block_size != 0 {
        return Err(Error::InvalidParameter(format!(
            "block size {block_size} does not divide n = {n}"
        )));
    }
    if block >= n / block_size {
        return Err(Error::InvalidSupport {
            index: block * block_size,
            n,
        });
    }
    Ok(block * block_size..(block + 1) * block_size)
}

fn validate_support<S: Scalar>(dict: &Dictionary<S>, support: &Support) -> Result<()> {
    if let Some(&bad) = support.atoms().last() {
        if bad >= dict.n() {
            return Err(Error::InvalidSupport { index: bad, n: dict.n() });
        }
    }
    Ok(())
}

/// `D_T`, columns in ascending index order.
pub fn restrict_columns<S: Scalar>(dict: &Dictionary<S>, support: &Support) -> Result<DMatrix<S>> {
    validate_support(dict, support)?;
    Ok(dict.matrix().select_columns(support.atoms().iter()))
}

/// Orthonormal basis of `range(D_T)`.
pub fn range_basis<S: Scalar>(dict: &Dictionary<S>, support: &Support) -> Result<DMatrix<S>> {
    Ok(linalg::range_basis(&restrict_columns(dict, support)?))
}

/// `P_T z`: orthogonal projection onto `range(D_T)`.
pub fn project_onto_range<S: Scalar>(dict: &Dictionary<S>, support: &Support, z: &Signal<S>) -> Result<Signal<S>> {
    check_len("project_onto_range", dict.d(), z.len())?;
    let basis = range_basis(dict, support)?;
    Ok(linalg::project_with_basis(&basis, z))
}

/// `Q_T z = z − P_T z`.
pub fn complement_projection<S: Scalar>(dict: &Dictionary<S>, support: &Support, z: &Signal<S>) -> Result<Signal<S>> {
    Ok(z - project_onto_range(dict, support, z)?)
}

/// Minimum-norm minimiser of `‖y − M D α‖₂` over `α` vanishing off `support`.
///
/// Returns `(x_p, α_p)` with `x_p = D α_p`.
pub fn constrained_least_squares<S: Scalar>(
    sensing: &SensingMatrix<S>,
    dict: &Dictionary<S>,
    support: &Support,
    y: &DVector<S>,
) -> Result<(Signal<S>, SparseCoefficients<S>)> {
    check_len("constrained_least_squares: M columns vs d", dict.d(), sensing.d())?;
    check_len("constrained_least_squares: y vs m", sensing.m(), y.len())?;
    let d_t = restrict_columns(dict, support)?;
    let md_t = sensing.matrix() * &d_t;
    let alpha_t = linalg::min_norm_solve(&md_t, y);
    let x_p = &d_t * &alpha_t;
    let alpha = SparseCoefficients::scatter(dict.n(), support.clone(), &alpha_t)?;
    Ok((x_p, alpha))
}
