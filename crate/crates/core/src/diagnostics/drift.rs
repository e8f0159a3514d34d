//! Monte Carlo checks of `P_γ V ≤ λ V + L`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, State, TuningParam};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq)]
pub struct DriftPoint {
    pub tuning: usize,
    pub coords: Vec<f64>,
    pub v: f64,
    pub pv: f64,
    pub pv_se: f64,
    /// `P_γV(x) − (λ̂ V(x) + L̂)`, nonpositive by construction.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    /// `None` when `V` vanishes on every test point, so any `λ` fits.
    pub lambda_hat: Option<f64>,
    pub l_hat: f64,
    pub points: Vec<DriftPoint>,
    /// Points where the supplied `(λ, L)` fails by more than 3 standard errors.
    pub violations: usize,
}

/// `max_i (b_i − λ a_i)`.
fn envelope(a: &[f64], b: &[f64], lambda: f64) -> f64 {
    a.iter().zip(b).map(|(a, b)| b - lambda * a).fold(f64::NEG_INFINITY, f64::max)
}

/// Feasible `(λ, L)` with `λ ≥ 0` minimizing the total slack
/// `Σ (λ a_i + L − b_i)`. The objective is convex and piecewise linear in
/// `λ`, so the optimum sits at `λ = 0` or where two constraints cross.
pub fn fit_drift(a: &[f64], b: &[f64]) -> (Option<f64>, f64) {
    if a.iter().all(|v| *v == 0.0) {
        return (None, envelope(a, b, 0.0).max(0.0));
    }
    let sa: f64 = a.iter().sum();
    let n = a.len() as f64;
    let objective = |l: f64| l * sa + n * envelope(a, b, l);
    let mut best = (0.0, objective(0.0));
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if a[i] != a[j] {
                let l = (b[i] - b[j]) / (a[i] - a[j]);
                if l > 0.0 {
                    let f = objective(l);
                    if f < best.1 {
                        best = (l, f);
                    }
                }
            }
        }
    }
    (Some(best.0), envelope(a, b, best.0).max(0.0))
}

/// Estimates `P_γV` at every test point for every tuning with
/// `samples_per_point` one-step draws and fits `(λ̂, L̂)` jointly.
pub fn check_drift(
    kernel: &KernelFamily,
    tunings: &[TuningParam],
    v: &(dyn Fn(&[f64]) -> f64 + Sync),
    test_points: &[State],
    samples_per_point: usize,
    given: Option<(f64, f64)>,
    stream: &RngStream,
) -> Result<DriftReport> {
    if tunings.is_empty() || test_points.is_empty() || samples_per_point < 2 {
        return Err(Error::ParamOutOfRange("need tunings, test points and at least 2 samples".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..tunings.len())
        .flat_map(|g| (0..test_points.len()).map(move |p| (g, p)))
        .collect();
    let mut points = jobs
        .par_iter()
        .enumerate()
        .map(|(job, &(g, p))| -> Result<DriftPoint> {
            let mut rng = stream.split(job as u64);
            let x = &test_points[p];
            let coords = kernel.embed(x)?;
            let vx = v(&coords);
            if !(vx >= 0.0) {
                return Err(Error::DomainError(format!("V({coords:?}) = {vx} is negative")));
            }
            let mut sum = 0.0;
            let mut sq = 0.0;
            for _ in 0..samples_per_point {
                let y = kernel.step(x, &tunings[g], &mut rng)?;
                let w = v(&kernel.embed(&y)?);
                sum += w;
                sq += w * w;
            }
            let n = samples_per_point as f64;
            let mean = sum / n;
            let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
            Ok(DriftPoint {
                tuning: g,
                coords,
                v: vx,
                pv: mean,
                pv_se: (var / n).sqrt(),
                residual: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let a: Vec<f64> = points.iter().map(|p| p.v).collect();
    let b: Vec<f64> = points.iter().map(|p| p.pv).collect();
    let (lambda_hat, l_hat) = fit_drift(&a, &b);
    for p in &mut points {
        p.residual = p.pv - (lambda_hat.unwrap_or(0.0) * p.v + l_hat);
    }
    let violations = match given {
        Some((lambda, l)) => points
            .iter()
            .filter(|p| p.pv - (lambda * p.v + l) > 3.0 * p.pv_se)
            .count(),
        None => 0,
    };
    Ok(DriftReport {
        lambda_hat,
        l_hat,
        points,
        violations,
    })
}
