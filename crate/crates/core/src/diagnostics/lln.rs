//! Mean-square error of trajectory averages `1/T Σ_{s=1}^T φ(X_s)`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::adaptation::{ols_slope, AdaptationPolicy};
use crate::error::{Error, Result};
use crate::kernels::KernelFamily;
use crate::process::{simulate, Init};
use crate::rng::RngStream;

pub type TestFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A test function with its declared Lipschitz bound.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub lipschitz: f64,
    pub f: TestFn,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl TestFunction {
    pub fn new(name: impl Into<String>, lipschitz: f64, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            lipschitz,
            f: Arc::new(f),
        }
    }

    /// `φ(x) = x_0`.
    pub fn first_coordinate() -> Self {
        Self::new("x0", 1.0, |x| x[0])
    }

    /// `φ(x) = min(‖x‖, 1)`.
    pub fn capped_norm() -> Self {
        Self::new("min(|x|,1)", 1.0, |x| x.iter().map(|v| v * v).sum::<f64>().sqrt().min(1.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LlnReport {
    pub phi: String,
    pub lipschitz: f64,
    pub reference: f64,
    pub t_grid: Vec<usize>,
    pub mse: Vec<f64>,
    /// Standard error of each MSE estimate over replicas.
    pub mse_se: Vec<f64>,
    /// Least-squares slope of `log MSE` against `log T`; `None` if some MSE is 0.
    pub slope: Option<f64>,
    /// MSE non-increasing after the first grid point, up to twice the noise band.
    pub monotone: bool,
}

pub fn lln_curve(
    kernel: &KernelFamily,
    policy: &AdaptationPolicy,
    init: &Init,
    phi: &TestFunction,
    reference: f64,
    t_grid: &[usize],
    replicas: usize,
    stream: &RngStream,
) -> Result<LlnReport> {
    if t_grid.is_empty() || t_grid.contains(&0) || replicas < 2 {
        return Err(Error::ParamOutOfRange("need a positive T grid and at least 2 replicas".into()));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::ParamOutOfRange("T grid must be increasing".into()));
    }
    let horizon = *t_grid.last().expect("nonempty");
    let errs = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let mut sum = 0.0;
            let mut next = 0;
            let mut out = Vec::with_capacity(t_grid.len());
            simulate(kernel, policy, init, horizon, &stream.split(r as u64), |t, _, x| {
                if t == 0 {
                    return Ok(());
                }
                sum += (phi.f)(&kernel.embed(x)?);
                if t == t_grid[next] {
                    let e = sum / t as f64 - reference;
                    out.push(e * e);
                    next += 1;
                }
                Ok(())
            })?;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = replicas as f64;
    let mut mse = Vec::with_capacity(t_grid.len());
    let mut mse_se = Vec::with_capacity(t_grid.len());
    for k in 0..t_grid.len() {
        let m = errs.iter().map(|e| e[k]).sum::<f64>() / n;
        let var = errs.iter().map(|e| (e[k] - m).powi(2)).sum::<f64>() / (n - 1.0);
        mse.push(m);
        mse_se.push((var / n).sqrt());
    }
    let slope = if mse.iter().all(|m| *m > 0.0) {
        let xs: Vec<f64> = t_grid.iter().map(|t| (*t as f64).ln()).collect();
        let ys: Vec<f64> = mse.iter().map(|m| m.ln()).collect();
        ols_slope(&xs, &ys)
    } else {
        None
    };
    let monotone = (1..mse.len().saturating_sub(1)).all(|k| mse[k + 1] <= mse[k] + 2.0 * (mse_se[k] + mse_se[k + 1]));
    Ok(LlnReport {
        phi: phi.name.clone(),
        lipschitz: phi.lipschitz,
        reference,
        t_grid: t_grid.to_vec(),
        mse,
        mse_se,
        slope,
        monotone,
    })
}
