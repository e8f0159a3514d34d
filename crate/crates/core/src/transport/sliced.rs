use rayon::prelude::*;

use super::{w_exact_1d, Method, TransportResult};
use crate::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Sliced `W1`: the mean of exact 1-D `W1` over random unit directions, with
/// the standard error over directions. Directions are drawn sequentially
/// from `stream`, so the result does not depend on the thread count.
pub fn sliced_w1(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    projections: usize,
    stream: &mut RngStream,
) -> Result<TransportResult> {
    let d = mu.dim();
    if nu.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: nu.dim(),
        });
    }
    if d < 2 {
        return Err(Error::DimensionError(format!(
            "sliced distance needs dimension at least 2, got {d}"
        )));
    }
    if projections == 0 {
        return Err(Error::ParamOutOfRange("projections must be at least 1".into()));
    }
    let dirs: Vec<Vec<f64>> = (0..projections)
        .map(|_| stream.unit_vector(d).iter().copied().collect())
        .collect();
    let vals = dirs
        .par_iter()
        .map(|u| Ok(w_exact_1d(&mu.project(u)?, &nu.project(u)?, 1)?.cost))
        .collect::<Result<Vec<f64>>>()?;
    let k = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / k;
    let se = if vals.len() > 1 {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
    } else {
        f64::NAN
    };
    Ok(TransportResult {
        cost: mean,
        plan: None,
        method: Method::Sliced,
        error: se,
    })
}
