use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{discrete_ot_exact, Method, TransportResult, SIZE_CAP};
use crate::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Number of stratified resamples used above the size cap.
pub const DEFAULT_BOOTSTRAP: usize = 16;

pub type MetricFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Base metric `ρ` on the state space.
#[derive(Clone)]
pub enum GroundMetric {
    Euclidean,
    /// `s · ‖x − y‖`.
    Scaled(f64),
    /// `1{x ≠ y}`.
    Discrete,
    Custom(MetricFn),
}

impl fmt::Debug for GroundMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundMetric::Euclidean => f.write_str("Euclidean"),
            GroundMetric::Scaled(s) => f.debug_tuple("Scaled").field(s).finish(),
            GroundMetric::Discrete => f.write_str("Discrete"),
            GroundMetric::Custom(_) => f.write_str("Custom(<fn>)"),
        }
    }
}

impl GroundMetric {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let euclid = || {
            x.iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
        match self {
            GroundMetric::Euclidean => euclid(),
            GroundMetric::Scaled(s) => s * euclid(),
            GroundMetric::Discrete => {
                if x == y {
                    0.0
                } else {
                    1.0
                }
            }
            GroundMetric::Custom(f) => f(x, y),
        }
    }
}

/// Matrix of `ρ(x_i, y_j)^p`, capped at 1 when `capped`.
pub fn cost_matrix(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    metric: &GroundMetric,
    p: u32,
    capped: bool,
) -> Result<DMatrix<f64>> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    if mu.len().saturating_mul(nu.len()) > SIZE_CAP {
        return Err(Error::SizeCap {
            rows: mu.len(),
            cols: nu.len(),
            cap: SIZE_CAP,
        });
    }
    Ok(DMatrix::from_fn(mu.len(), nu.len(), |i, j| {
        let r = metric.eval(mu.point(i), nu.point(j));
        let r = if capped { r.min(1.0) } else { r };
        r.powi(p as i32)
    }))
}

/// Exact `W_p` under the ground metric by discrete optimal transport.
pub fn wasserstein_exact(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    metric: &GroundMetric,
    p: u32,
) -> Result<TransportResult> {
    if p != 1 && p != 2 {
        return Err(Error::ParamOutOfRange(format!("order p = {p} must be 1 or 2")));
    }
    let c = cost_matrix(mu, nu, metric, p, false)?;
    let mut r = discrete_ot_exact(&c, mu.weights(), nu.weights())?;
    r.cost = r.cost.max(0.0).powf(1.0 / p as f64);
    Ok(r)
}

fn stratified(n: usize, s: usize, stream: &mut RngStream) -> Vec<usize> {
    (0..s)
        .map(|k| {
            let u = stream.uniform();
            (((k as f64 + u) * n as f64 / s as f64) as usize).min(n - 1)
        })
        .collect()
}

/// `W_{ρ∧1}` by exact optimal transport. When either support exceeds
/// `subsample` atoms, the distance is averaged over stratified subsamples
/// of that size and the spread across resamples is reported as the error.
pub fn bounded_distance(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    metric: &GroundMetric,
    subsample: usize,
    stream: &mut RngStream,
) -> Result<TransportResult> {
    let fits = mu.len().saturating_mul(nu.len()) <= SIZE_CAP;
    if subsample == 0 || (mu.len() <= subsample && nu.len() <= subsample) {
        if !fits {
            return Err(Error::SizeCap {
                rows: mu.len(),
                cols: nu.len(),
                cap: SIZE_CAP,
            });
        }
        let c = cost_matrix(mu, nu, metric, 1, true)?;
        let mut r = discrete_ot_exact(&c, mu.weights(), nu.weights())?;
        r.cost = r.cost.min(1.0);
        return Ok(r);
    }
    if subsample.saturating_mul(subsample) > SIZE_CAP {
        return Err(Error::SizeCap {
            rows: subsample,
            cols: subsample,
            cap: SIZE_CAP,
        });
    }
    let mut vals = Vec::with_capacity(DEFAULT_BOOTSTRAP);
    for _ in 0..DEFAULT_BOOTSTRAP {
        let a = if mu.len() > subsample {
            mu.subset(&stratified(mu.len(), subsample, stream))?
        } else {
            mu.clone()
        };
        let b = if nu.len() > subsample {
            nu.subset(&stratified(nu.len(), subsample, stream))?
        } else {
            nu.clone()
        };
        let c = cost_matrix(&a, &b, metric, 1, true)?;
        vals.push(discrete_ot_exact(&c, a.weights(), b.weights())?.cost.min(1.0));
    }
    let k = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / k;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
    Ok(TransportResult {
        cost: mean,
        plan: None,
        method: Method::ExactOt,
        error: sd,
    })
}
