//! Coupled one-step discrepancy `D_ρ(Γ_{t+1}, Γ_t)` between consecutive
//! adapted kernels.

use rayon::prelude::*;

use crate::adaptation::ols_slope;
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, State};
use crate::process::AdaptiveTrajectory;
use crate::rng::RngStream;

pub const DEFAULT_PAIRS: usize = 256;

/// Pair base points on real states are snapped to multiples of this spacing.
pub const REAL_LATTICE: f64 = 1.0 / (1u64 << 24) as f64;

#[derive(Clone, Debug)]
pub struct DiminishingConfig {
    pub deltas: Vec<f64>,
    pub pairs_per_delta: usize,
    pub draws_per_pair: usize,
    /// Times `t` at which `(Γ_t, Γ_{t+1})` is examined; every step when `None`.
    pub times: Option<Vec<usize>>,
    /// Residual discrepancy above which the run is flagged.
    pub flag_tol: f64,
}

impl Default for DiminishingConfig {
    fn default() -> Self {
        Self {
            deltas: vec![0.5, 0.25, 0.125, 0.0625],
            pairs_per_delta: DEFAULT_PAIRS,
            draws_per_pair: 1,
            times: None,
            flag_tol: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiminishingEstimate {
    pub deltas: Vec<f64>,
    pub times: Vec<usize>,
    /// `values[i][k]`: estimate at `times[i]` and `deltas[k]`, in `[0, 1]`.
    pub values: Vec<Vec<f64>>,
    /// Per-time intercept of the least-squares line `D(δ) ≈ a + bδ`, clamped
    /// at 0: the part of the discrepancy that does not vanish as `δ → 0`.
    pub residual: Vec<f64>,
    /// Mean residual over the later half of the examined times.
    pub late_residual: f64,
    pub non_diminishing: bool,
}

fn residual(deltas: &[f64], row: &[f64]) -> f64 {
    if deltas.len() < 2 {
        return row.first().copied().unwrap_or(0.0);
    }
    let n = deltas.len() as f64;
    let slope = ols_slope(deltas, row).unwrap_or(0.0);
    let a = row.iter().sum::<f64>() / n - slope * deltas.iter().sum::<f64>() / n;
    a.max(0.0)
}

/// A partner state within distance `delta` of `x`, or `None` when the state
/// space has no such point other than `x`.
fn partner(kernel: &KernelFamily, x: &State, delta: f64, stream: &mut RngStream) -> Result<Option<State>> {
    Ok(match (kernel, x) {
        (KernelFamily::DiscreteAr, State::Real(v)) => {
            let up = v + delta;
            if up < 1.0 {
                Some(State::Real(up))
            } else if v - delta >= 0.0 {
                Some(State::Real(v - delta))
            } else {
                None
            }
        }
        (KernelFamily::DiscreteRwm(k), State::Grid(i)) => {
            let grid = k.grid();
            let coords = grid.coords(*i);
            let axes: Vec<usize> = (0..grid.dim()).filter(|&a| grid.spacing()[a] <= delta).collect();
            if axes.is_empty() {
                return Ok(None);
            }
            let axis = axes[stream.below(axes.len())];
            let mut off = vec![0i64; grid.dim()];
            off[axis] = if stream.uniform() < 0.5 { 1 } else { -1 };
            grid.shifted(&coords, &off)
                .or_else(|| {
                    off[axis] = -off[axis];
                    grid.shifted(&coords, &off)
                })
                .filter(|&j| k.density()[j] > 0.0)
                .map(State::Grid)
        }
        (_, State::Vector(v)) => {
            let u = stream.unit_vector(v.len());
            Some(State::Vector(v + u * delta))
        }
        (k, s) => {
            return Err(Error::VariantMismatch(format!(
                "state {s:?} does not belong to kernel {}",
                k.name()
            )))
        }
    })
}

/// Stratified base points over the visited prefix `X_0, …, X_t`.
fn base_points(traj: &AdaptiveTrajectory, t: usize, n: usize, stream: &mut RngStream) -> Vec<State> {
    let len = t + 1;
    (0..n)
        .map(|k| {
            let s = (((k as f64 + stream.uniform()) * len as f64 / n as f64) as usize).min(len - 1);
            match &traj.records[s].state {
                State::Real(v) => State::Real(((v / REAL_LATTICE).floor() * REAL_LATTICE).min(1.0 - REAL_LATTICE)),
                other => other.clone(),
            }
        })
        .collect()
}

/// For each examined `t` and `δ`, the largest coupled one-step expected
/// capped distance `E[ρ ∧ 1](X₁, Y₁)` with `X₁ ~ P_{Γ_{t+1}}(x, ·)` and
/// `Y₁ ~ P_{Γ_t}(y, ·)` over sampled pairs with `ρ(x, y) ≤ δ`.
pub fn estimate_diminishing(
    traj: &AdaptiveTrajectory,
    kernel: &KernelFamily,
    cfg: &DiminishingConfig,
    stream: &RngStream,
) -> Result<DiminishingEstimate> {
    if cfg.deltas.is_empty() || cfg.pairs_per_delta == 0 || cfg.draws_per_pair == 0 {
        return Err(Error::ParamOutOfRange("need deltas, pairs and draws".into()));
    }
    if cfg.deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::ParamOutOfRange("deltas must be positive".into()));
    }
    let horizon = traj.horizon();
    if horizon == 0 {
        return Err(Error::ParamOutOfRange("trajectory has no transitions".into()));
    }
    let times: Vec<usize> = match &cfg.times {
        Some(ts) => {
            if let Some(&t) = ts.iter().find(|&&t| t >= horizon) {
                return Err(Error::ParamOutOfRange(format!("time {t} has no successor tuning")));
            }
            ts.clone()
        }
        None => (0..horizon).collect(),
    };
    let values = times
        .par_iter()
        .map(|&t| -> Result<Vec<f64>> {
            let g_next = &traj.records[t + 1].tuning;
            let g_now = &traj.records[t].tuning;
            let mut rng = stream.split(t as u64);
            cfg.deltas
                .iter()
                .map(|&delta| {
                    let mut best: f64 = 0.0;
                    for x in base_points(traj, t, cfg.pairs_per_delta, &mut rng) {
                        let y = partner(kernel, &x, delta, &mut rng)?.unwrap_or_else(|| x.clone());
                        let mut acc = 0.0;
                        for _ in 0..cfg.draws_per_pair {
                            let (x1, y1) = kernel.coupled_step(&x, g_next, &y, g_now, &mut rng)?;
                            acc += kernel.state_distance(&x1, &y1)?.min(1.0);
                        }
                        best = best.max(acc / cfg.draws_per_pair as f64);
                    }
                    Ok(best)
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let residuals: Vec<f64> = values.iter().map(|row| residual(&cfg.deltas, row)).collect();
    let late = &residuals[residuals.len() / 2..];
    let late_residual = late.iter().sum::<f64>() / late.len() as f64;
    Ok(DiminishingEstimate {
        deltas: cfg.deltas.clone(),
        times,
        values,
        residual: residuals,
        late_residual,
        non_diminishing: late_residual > cfg.flag_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptation::AdaptationPolicy;
    use crate::kernels::{Potential, TuningParam, Ula};
    use crate::linalg::PsdMatrix;
    use crate::process::{run_adaptive, Init};
    use crate::rng::make_stream;

    #[test]
    fn frozen_discrete_ar_is_half_delta() {
        let init = Init::Point(TuningParam::DiscreteBase(2), State::Real(0.0));
        let traj = run_adaptive(&KernelFamily::DiscreteAr, &AdaptationPolicy::frozen(), &init, 200, &make_stream(91, 0)).unwrap();
        let cfg = DiminishingConfig {
            times: Some(vec![0, 50, 199]),
            ..Default::default()
        };
        let est = estimate_diminishing(&traj, &KernelFamily::DiscreteAr, &cfg, &make_stream(92, 0)).unwrap();
        for row in &est.values {
            for (v, d) in row.iter().zip(&est.deltas) {
                assert_eq!(*v, d / 2.0);
            }
        }
        assert!(!est.non_diminishing);
    }

    #[test]
    fn ula_same_tuning_contracts() {
        let pot = Potential::quadratic(PsdMatrix::diag(&[1.0, 4.0]).unwrap()).unwrap();
        let k = KernelFamily::Ula(Ula::new(pot, 0.2).unwrap());
        let g = TuningParam::Langevin {
            m: PsdMatrix::identity(2),
            h: 0.2,
        };
        let init = Init::Point(g, State::vector(&[1.0, -1.0]));
        let traj = run_adaptive(&k, &AdaptationPolicy::frozen(), &init, 30, &make_stream(93, 0)).unwrap();
        let cfg = DiminishingConfig {
            deltas: vec![0.5, 0.1],
            pairs_per_delta: 32,
            ..Default::default()
        };
        let est = estimate_diminishing(&traj, &k, &cfg, &make_stream(94, 0)).unwrap();
        let rate = (1.0 - 2.0 * 0.2 * 4.0 / 5.0f64).sqrt();
        for row in &est.values {
            for (v, d) in row.iter().zip(&est.deltas) {
                assert!(*v <= rate * d + 1e-12);
            }
        }
    }
}
