//! Seeded generators for the experimental ensemble: Gaussian sensing
//! matrices, overcomplete DFT dictionaries, separated block-sparse
//! coefficients and white Gaussian noise.

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::model::{Dictionary, SensingMatrix, SparseCoefficients, Support};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Identifies one independent random stream: trial `trial_index` of a run
/// seeded with `master_seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExperimentSeed {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl ExperimentSeed {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }

    /// ChaCha8 keyed by the master seed, positioned on stream `trial_index`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.trial_index);
        rng
    }
}

/// Variance convention for Gaussian sensing entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingScale {
    /// Entries `N(0, 1/m)`, so `E‖Mx‖² = ‖x‖²`.
    PerMeasurement,
    /// Entries `N(0, 1)`.
    Unit,
}

impl SensingScale {
    pub fn as_str(self) -> &'static str {
        match self {
            SensingScale::PerMeasurement => "normalized",
            SensingScale::Unit => "unit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "normalized" => Some(SensingScale::PerMeasurement),
            "unit" => Some(SensingScale::Unit),
            _ => None,
        }
    }
}

/// `m × d` matrix with i.i.d. real `N(0, 1/m)` entries, embedded in the field `S`.
pub fn gaussian_sensing<S: Scalar, R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Result<SensingMatrix<S>> {
    gaussian_sensing_scaled(m, d, SensingScale::PerMeasurement, rng)
}

/// Gaussian sensing matrix with an explicit variance convention.
pub fn gaussian_sensing_scaled<S: Scalar, R: Rng + ?Sized>(
    m: usize,
    d: usize,
    convention: SensingScale,
    rng: &mut R,
) -> Result<SensingMatrix<S>> {
    if m == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!("gaussian_sensing: m = {m}, d = {d}")));
    }
    let scale = match convention {
        SensingScale::PerMeasurement => 1.0 / (m as f64).sqrt(),
        SensingScale::Unit => 1.0,
    };
    // row-major fill so that the first rows coincide across different m
    let mut entries = DMatrix::zeros(m, d);
    for i in 0..m {
        for j in 0..d {
            let g: f64 = StandardNormal.sample(rng);
            entries[(i, j)] = S::from_real(g * scale);
        }
    }
    SensingMatrix::new(entries)
}

/// `d × (redundancy·d)` DFT frame, column `l` equal to `exp(−2πi·j·l/n)/√d`.
pub fn overcomplete_dft(d: usize, redundancy: usize, block_size: usize) -> Result<Dictionary<Complex64>> {
    if d == 0 || redundancy == 0 {
        return Err(Error::InvalidParameter(format!(
            "overcomplete_dft: d = {d}, redundancy = {redundancy}"
        )));
    }
    let n = d * redundancy;
    let scale = 1.0 / (d as f64).sqrt();
    let atoms = DMatrix::from_fn(d, n, |j, l| {
        // reduce j·l mod n in integers to keep the phase exact for large d
        let phase = -2.0 * std::f64::consts::PI * ((j * l) % n) as f64 / n as f64;
        Complex64::from_polar(scale, phase)
    });
    Dictionary::new(atoms, block_size)
}

/// `k` blocks of width `block_size` chosen uniformly among placements whose
/// block indices pairwise differ by more than `min_gap`; nonzero entries are
/// i.i.d. standard normal in the field.
pub fn clustered_block_coeffs<S: Scalar, R: Rng + ?Sized>(
    n: usize,
    block_size: usize,
    k: usize,
    min_gap: usize,
    rng: &mut R,
) -> Result<SparseCoefficients<S>> {
    if block_size == 0 || n % block_size != 0 {
        return Err(Error::Generation(format!("block size {block_size} does not divide n = {n}")));
    }
    let blocks = n / block_size;
    let reserved = k.saturating_sub(1) * min_gap;
    if k == 0 || reserved + k > blocks {
        return Err(Error::Generation(format!(
            "cannot place {k} blocks with gap {min_gap} among {blocks} blocks"
        )));
    }
    // gapped placements biject onto k-subsets of a shortened index range
    let mut picks = rand::seq::index::sample(rng, blocks - reserved, k).into_vec();
    picks.sort_unstable();
    let chosen: Vec<usize> = picks.iter().enumerate().map(|(i, &p)| p + i * min_gap).collect();
    let support = Support::from_blocks(chosen, block_size, n)?;
    let restricted = DVector::from_fn(support.len(), |_, _| S::standard_normal(rng));
    SparseCoefficients::scatter(n, support, &restricted)
}

/// White Gaussian noise with `E|e_i|² = σ²`.
pub fn awgn<S: Scalar, R: Rng + ?Sized>(len: usize, sigma: f64, rng: &mut R) -> Result<DVector<S>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("noise level {sigma}")));
    }
    Ok(DVector::from_fn(len, |_, _| S::standard_normal(rng) * S::from_real(sigma)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_shape_and_unit_columns() {
        let d = overcomplete_dft(16, 4, 4).unwrap();
        assert_eq!((d.d(), d.n(), d.num_blocks()), (16, 64, 16));
        for j in 0..d.n() {
            assert!((d.column_norm(j) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dft_first_columns_have_flat_magnitude() {
        let d = overcomplete_dft(8, 4, 1).unwrap();
        for l in 0..2 {
            for j in 0..8 {
                let v = d.matrix()[(j, l)];
                assert!((v.norm() - 1.0 / 8f64.sqrt()).abs() < 1e-15);
                let expected = Complex64::from_polar(1.0 / 8f64.sqrt(), -2.0 * std::f64::consts::PI * (j * l) as f64 / 32.0);
                assert!((v - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn unitary_dft_gram_is_identity() {
        let d = overcomplete_dft(12, 1, 1).unwrap();
        let gram = d.matrix().ad_mul(d.matrix());
        assert!((gram - DMatrix::<Complex64>::identity(12, 12)).camax() < 1e-12);
    }

    #[test]
    fn clustered_blocks_respect_gap() {
        for t in 0..200 {
            let mut rng = ExperimentSeed::new(3, t).rng();
            let c: SparseCoefficients<f64> = clustered_block_coeffs(64, 4, 3, 1, &mut rng).unwrap();
            let blocks = c.support().blocks(4);
            assert_eq!(blocks.len(), 3);
            assert!(c.support().is_union_of_blocks(4));
            assert!(blocks.windows(2).all(|w| w[1] - w[0] >= 2), "{blocks:?}");
            assert_eq!(c.nnz(), 12);
        }
    }

    #[test]
    fn paper_regime_two_blocks_of_four() {
        let mut rng = ExperimentSeed::new(1, 0).rng();
        let c: SparseCoefficients<Complex64> = clustered_block_coeffs(4096, 4, 2, 1, &mut rng).unwrap();
        assert_eq!(c.support().len(), 8);
        assert_eq!(c.nnz(), 8);
        let b = c.support().blocks(4);
        assert!(b[1] - b[0] >= 2);
    }

    #[test]
    fn degenerate_placements() {
        let mut rng = ExperimentSeed::new(1, 0).rng();
        let all: SparseCoefficients<f64> = clustered_block_coeffs(16, 4, 4, 0, &mut rng).unwrap();
        assert_eq!(all.support().blocks(4), vec![0, 1, 2, 3]);
        let plain: SparseCoefficients<f64> = clustered_block_coeffs(10, 1, 3, 0, &mut rng).unwrap();
        assert_eq!(plain.support().len(), 3);
        assert!(clustered_block_coeffs::<f64, _>(16, 4, 3, 1, &mut rng).is_err());
        assert!(clustered_block_coeffs::<f64, _>(16, 4, 0, 0, &mut rng).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let s = ExperimentSeed::new(42, 5);
        let a: SensingMatrix<f64> = gaussian_sensing(7, 9, &mut s.rng()).unwrap();
        let b: SensingMatrix<f64> = gaussian_sensing(7, 9, &mut s.rng()).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let other: SensingMatrix<f64> = gaussian_sensing(7, 9, &mut ExperimentSeed::new(42, 6).rng()).unwrap();
        assert_ne!(a.matrix(), other.matrix());
    }

    #[test]
    fn zero_noise() {
        let e: DVector<Complex64> = awgn(5, 0.0, &mut ExperimentSeed::new(0, 0).rng()).unwrap();
        assert!(e.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        assert!(awgn::<f64, _>(5, -1.0, &mut ExperimentSeed::new(0, 0).rng()).is_err());
    }
}
