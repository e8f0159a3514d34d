use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kernels::{discrete_ar_law, gaussian_ar_moments};
use crate::linalg::PsdMatrix;
use crate::transport::{w2_gaussian, w_exact_vs_uniform};

/// Slack allowed when comparing a distance against its bound.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum ArExample {
    /// Discrete auto-regression from `x`; distance `W1` to `Unif(0, 1)`,
    /// bound `γ^{-t}`.
    Discrete { gamma: u32, x: f64 },
    /// Gaussian auto-regression from `x`; distance `W2` to `N(0, C)`,
    /// bound `γ^t (‖x‖ + √tr C)`.
    Gaussian {
        cov: PsdMatrix,
        gamma: f64,
        x: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub t: u32,
    pub exact_distance: f64,
    pub paper_bound: f64,
    pub satisfied: bool,
}

/// Exact `t`-step distances to stationarity and their geometric bounds for
/// `t = t_min..=t_max`.
pub fn ar_bound_check(example: &ArExample, t_min: u32, t_max: u32) -> Result<Vec<BoundRow>> {
    if t_min > t_max {
        return Err(Error::ParamOutOfRange(format!("empty range {t_min}..={t_max}")));
    }
    (t_min..=t_max)
        .map(|t| {
            let (d, b) = match example {
                ArExample::Discrete { gamma, x } => {
                    let law = discrete_ar_law(*x, *gamma, t)?;
                    let d = w_exact_vs_uniform(&law, 1)?.cost;
                    (d, (*gamma as f64).powi(-(t as i32)))
                }
                ArExample::Gaussian { cov, gamma, x } => {
                    if !(*gamma > 0.0 && *gamma < 1.0) {
                        return Err(Error::DomainError(format!("AR coefficient {gamma} outside (0, 1)")));
                    }
                    let x = DVector::from_column_slice(x);
                    let (m, c) = gaussian_ar_moments(&x, *gamma, cov, t)?;
                    let d = w2_gaussian(&m, &c, &DVector::zeros(x.len()), cov)?;
                    (d, gamma.powi(t as i32) * (x.norm() + cov.trace().sqrt()))
                }
            };
            Ok(BoundRow {
                t,
                exact_distance: d,
                paper_bound: b,
                satisfied: d <= b + BOUND_TOL,
            })
        })
        .collect()
}

/// Uniform moment bound `2K/(1 − λ) + V₀` for restricted adaptation.
pub fn restricted_adaptation_drift_bound(lambda: f64, k: f64, v0: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::ParamOutOfRange(format!("lambda = {lambda} must lie in (0, 1)")));
    }
    if !(k >= 0.0 && v0 >= 0.0) || !k.is_finite() || !v0.is_finite() {
        return Err(Error::ParamOutOfRange(format!("K = {k} and V0 = {v0} must be finite and nonnegative")));
    }
    Ok(2.0 * k / (1.0 - lambda) + v0)
}
