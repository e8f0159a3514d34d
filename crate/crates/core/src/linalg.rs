//! Symmetric positive-semidefinite matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Relative symmetry tolerance accepted on construction.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues in `[-PSD_CLIP_TOL * lambda_max, 0)` are treated as zero.
pub const PSD_CLIP_TOL: f64 = 1e-10;

/// A symmetric positive-semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdMatrix {
    m: DMatrix<f64>,
}

impl PsdMatrix {
    /// Validates symmetry and the eigenvalue floor, then stores the
    /// symmetrized matrix.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::DimensionError(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.amax();
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let dev = (m[(i, j)] - m[(j, i)]).abs();
                if dev > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        deviation: dev,
                    });
                }
            }
        }
        let sym = (&m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if min < -PSD_CLIP_TOL * max.abs().max(0.0) || (max <= 0.0 && min < 0.0) {
            return Err(Error::NonPsd {
                min_eigenvalue: min,
                max_eigenvalue: max,
            });
        }
        Ok(Self { m: sym })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    /// Diagonal matrix; every entry must be nonnegative.
    pub fn diag(entries: &[f64]) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::NonPsd {
                min_eigenvalue: bad,
                max_eigenvalue: entries.iter().cloned().fold(f64::NAN, f64::max),
            });
        }
        if entries.is_empty() {
            return Err(Error::DimensionError("empty diagonal".into()));
        }
        Ok(Self {
            m: DMatrix::from_diagonal(&DVector::from_column_slice(entries)),
        })
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Result<Self> {
        Self::diag(&vec![s; dim])
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    /// Eigenvalues (clipped at zero) and orthonormal eigenvectors.
    pub fn eigen(&self) -> (DVector<f64>, DMatrix<f64>) {
        let eig = SymmetricEigen::new(self.m.clone());
        let vals = eig.eigenvalues.map(|v| v.max(0.0));
        (vals, eig.eigenvectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().0.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigen().0.max()
    }

    /// Rebuilds `V f(Λ) Vᵀ` from the spectral decomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let (vals, vecs) = self.eigen();
        let d = DMatrix::from_diagonal(&vals.map(f));
        let out = &vecs * d * vecs.transpose();
        (&out + out.transpose()) * 0.5
    }

    /// Symmetric PSD square root.
    pub fn sqrt(&self) -> PsdMatrix {
        PsdMatrix {
            m: self.map_spectrum(f64::sqrt),
        }
    }

    /// Inverse, or `None` when the smallest eigenvalue is below
    /// `rel_floor * lambda_max`.
    pub fn inverse(&self, rel_floor: f64) -> Option<DMatrix<f64>> {
        let (vals, _) = self.eigen();
        let max = vals.max();
        if max <= 0.0 || vals.min() <= rel_floor * max {
            return None;
        }
        Some(self.map_spectrum(|v| 1.0 / v))
    }

    /// Projects the spectrum onto `[lo, hi]` by clipping eigenvalues.
    pub fn project_eigen_box(&self, lo: f64, hi: f64) -> PsdMatrix {
        PsdMatrix {
            m: self.map_spectrum(|v| v.clamp(lo, hi)),
        }
    }

    /// True when every eigenvalue lies in `[lo, hi]` up to `tol`.
    pub fn spectrum_within(&self, lo: f64, hi: f64, tol: f64) -> bool {
        let raw = SymmetricEigen::new(self.m.clone()).eigenvalues;
        raw.iter().all(|&v| v >= lo - tol && v <= hi + tol)
    }

    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.m * v
    }

    /// Spectral norm of the difference between two matrices.
    pub fn operator_distance(&self, other: &PsdMatrix) -> f64 {
        let diff = &self.m - &other.m;
        SymmetricEigen::new(diff)
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// Symmetric PSD square root; fails with `NonPsd` when the input is not PSD.
pub fn psd_sqrt(m: &PsdMatrix) -> Result<PsdMatrix> {
    let raw = SymmetricEigen::new(m.as_matrix().clone()).eigenvalues;
    let max = raw.max();
    let min = raw.min();
    if min < -PSD_CLIP_TOL * max.max(0.0) {
        return Err(Error::NonPsd {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    Ok(m.sqrt())
}

/// Returns `mean + cov_sqrt · z` with `z` standard normal drawn from `stream`.
pub fn gaussian_sample(
    stream: &mut RngStream,
    mean: &DVector<f64>,
    cov_sqrt: &PsdMatrix,
) -> Result<DVector<f64>> {
    if mean.len() != cov_sqrt.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov_sqrt.dim(),
            found: mean.len(),
        });
    }
    let z = stream.normal_vector(mean.len());
    Ok(mean + cov_sqrt.mul_vec(&z))
}
