use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::PsdMatrix;
use crate::rng::RngStream;

/// Gaussian auto-regression `X_t = γ X_{t-1} + √(1-γ²) ξ_t`, `ξ_t ~ N(0, C)`,
/// on a finite-dimensional truncation of the state space.
#[derive(Clone, Debug)]
pub struct GaussianAr {
    cov: PsdMatrix,
    cov_sqrt: PsdMatrix,
    gamma_max: f64,
}

impl GaussianAr {
    /// `gamma_max` is the uniform bound `γ*` on admissible coefficients.
    pub fn new(cov: PsdMatrix, gamma_max: f64) -> Result<Self> {
        if !(gamma_max > 0.0 && gamma_max < 1.0) {
            return Err(Error::ParamOutOfRange(format!(
                "gamma_max = {gamma_max} must lie in (0, 1)"
            )));
        }
        let cov_sqrt = crate::linalg::psd_sqrt(&cov)?;
        Ok(Self {
            cov,
            cov_sqrt,
            gamma_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.cov.dim()
    }

    pub fn cov(&self) -> &PsdMatrix {
        &self.cov
    }

    pub fn cov_sqrt(&self) -> &PsdMatrix {
        &self.cov_sqrt
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    pub(crate) fn check_coef(&self, g: f64) -> Result<()> {
        if !(g > 0.0 && g <= self.gamma_max) {
            return Err(Error::DomainError(format!(
                "AR coefficient {g} outside (0, {}]",
                self.gamma_max
            )));
        }
        Ok(())
    }

    pub(super) fn apply(&self, x: &DVector<f64>, g: f64, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_coef(g)?;
        step_with(x, g, &self.cov_sqrt, z)
    }
}

fn step_with(
    x: &DVector<f64>,
    g: f64,
    cov_sqrt: &PsdMatrix,
    z: &DVector<f64>,
) -> Result<DVector<f64>> {
    if x.len() != cov_sqrt.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov_sqrt.dim(),
            found: x.len(),
        });
    }
    Ok(x * g + cov_sqrt.mul_vec(z) * (1.0 - g * g).sqrt())
}

/// One step `γx + √(1-γ²)·cov_sqrt·z`.
pub fn gaussian_ar_step(
    x: &DVector<f64>,
    gamma: f64,
    cov_sqrt: &PsdMatrix,
    stream: &mut RngStream,
) -> Result<DVector<f64>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::DomainError(format!(
            "AR coefficient {gamma} outside (0, 1)"
        )));
    }
    if x.len() != cov_sqrt.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov_sqrt.dim(),
            found: x.len(),
        });
    }
    let z = stream.normal_vector(x.len());
    step_with(x, gamma, cov_sqrt, &z)
}

/// Exact `t`-step law from `x`: mean `γ^t x`, covariance `(1 - γ^{2t}) C`.
pub fn gaussian_ar_moments(
    x: &DVector<f64>,
    gamma: f64,
    cov: &PsdMatrix,
    t: u32,
) -> Result<(DVector<f64>, PsdMatrix)> {
    if x.len() != cov.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov.dim(),
            found: x.len(),
        });
    }
    let gt = gamma.powi(t as i32);
    let scale = 1.0 - gt * gt;
    Ok((x * gt, PsdMatrix::new(cov.as_matrix() * scale)?))
}
