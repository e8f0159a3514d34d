//! ε-convergence horizons `M_{ε,ρ}(γ, x)` of frozen kernels.

use crate::adaptation::AdaptationPolicy;
use crate::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::kernels::{discrete_ar_law, KernelFamily, State, TuningParam};
use crate::process::{run_ensemble, Init};
use crate::rng::RngStream;
use crate::transport::{bounded_distance, w_exact_vs_uniform, GroundMetric};

#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentEstimate {
    pub eps: f64,
    /// Distance to the reference at `n = 0..=n_max`.
    pub distances: Vec<f64>,
    /// Monte Carlo error per entry (zero on exact paths).
    pub errors: Vec<f64>,
    /// `None` when censored at `n_max`.
    pub horizon: Option<usize>,
    pub reference: String,
}

/// Smallest `N` with `distances[n] ≤ ε` for every `n ≥ N`.
pub fn containment_horizon(distances: &[f64], eps: f64) -> Option<usize> {
    let mut n = distances.len();
    while n > 0 && distances[n - 1] <= eps {
        n -= 1;
    }
    (n < distances.len()).then_some(n)
}

impl ContainmentEstimate {
    pub fn from_distances(eps: f64, distances: Vec<f64>, errors: Vec<f64>, reference: impl Into<String>) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::ParamOutOfRange(format!("eps = {eps} must lie in (0, 1)")));
        }
        Ok(Self {
            eps,
            horizon: containment_horizon(&distances, eps),
            distances,
            errors,
            reference: reference.into(),
        })
    }

    pub fn n_max(&self) -> usize {
        self.distances.len().saturating_sub(1)
    }

    pub fn censored(&self) -> bool {
        self.horizon.is_none()
    }

    /// Horizon for a different `ε` on the same distances.
    pub fn horizon_at(&self, eps: f64) -> Option<usize> {
        containment_horizon(&self.distances, eps)
    }

    pub fn note(&self) -> String {
        match self.horizon {
            Some(n) => format!("M(eps={}) = {n}", self.eps),
            None => format!(
                "censored: distance exceeds eps={} at n_max={}",
                self.eps,
                self.n_max()
            ),
        }
    }
}

/// Exact path for the discrete auto-regression, where `ρ ∧ 1 = ρ` on `[0, 1)`
/// and the distance is `W1` of the enumerated law to `Unif(0, 1)`.
pub fn containment_discrete_ar_exact(gamma: u32, x: f64, eps: f64, n_max: u32) -> Result<ContainmentEstimate> {
    let distances = (0..=n_max)
        .map(|n| Ok(w_exact_vs_uniform(&discrete_ar_law(x, gamma, n)?, 1)?.cost))
        .collect::<Result<Vec<f64>>>()?;
    let errors = vec![0.0; distances.len()];
    ContainmentEstimate::from_distances(eps, distances, errors, "exact Unif(0,1)")
}

#[derive(Clone, Debug)]
pub struct ContainmentConfig {
    pub eps: f64,
    pub n_max: usize,
    pub replicas: usize,
    pub metric: GroundMetric,
    /// Exact transport above this many atoms per side is subsampled.
    pub subsample: usize,
}

/// Estimates `W_{ρ∧1}(P^n_γ(x, ·), π)` for `n ≤ n_max` from `replicas`
/// frozen chains started at `x` against reference draws from `π`.
pub fn estimate_containment(
    kernel: &KernelFamily,
    tuning: &TuningParam,
    x: &State,
    cfg: &ContainmentConfig,
    reference: &EmpiricalMeasure,
    reference_note: &str,
    stream: &RngStream,
) -> Result<ContainmentEstimate> {
    let checkpoints: Vec<usize> = (0..=cfg.n_max).collect();
    let init = Init::Point(tuning.clone(), x.clone());
    let sections = run_ensemble(
        kernel,
        &AdaptationPolicy::frozen(),
        &init,
        cfg.n_max,
        cfg.replicas,
        &checkpoints,
        &stream.split(0),
    )?;
    let mut ot_rng = stream.split(1);
    let mut distances = Vec::with_capacity(sections.len());
    let mut errors = Vec::with_capacity(sections.len());
    for s in &sections {
        let r = bounded_distance(&s.measure, reference, &cfg.metric, cfg.subsample, &mut ot_rng)?;
        distances.push(r.cost);
        errors.push(r.error);
    }
    ContainmentEstimate::from_distances(cfg.eps, distances, errors, reference_note)
}

/// Burn-in `⌈10 · log(0.01) / log(1 − α̂)⌉` used for pilot references.
pub fn pilot_burn_in(alpha_hat: f64) -> Result<usize> {
    if !(alpha_hat > 0.0 && alpha_hat < 1.0) {
        return Err(Error::ParamOutOfRange(format!("alpha_hat = {alpha_hat} must lie in (0, 1)")));
    }
    Ok((10.0 * 0.01f64.ln() / (1.0 - alpha_hat).ln()).ceil() as usize)
}

/// Approximate `π` draws: final states of `samples` independent frozen chains
/// run for the pilot burn-in.
pub fn pilot_reference(
    kernel: &KernelFamily,
    tuning: &TuningParam,
    x0: &State,
    alpha_hat: f64,
    samples: usize,
    stream: &RngStream,
) -> Result<(EmpiricalMeasure, String)> {
    let burn = pilot_burn_in(alpha_hat)?;
    let init = Init::Point(tuning.clone(), x0.clone());
    let cs = run_ensemble(kernel, &AdaptationPolicy::frozen(), &init, burn, samples, &[burn], stream)?;
    let note = format!("approximate: frozen pilot chains, burn-in {burn} steps (alpha_hat={alpha_hat})");
    Ok((cs.into_iter().next().map(|c| c.measure).expect("one checkpoint"), note))
}

/// Tail curve `T' ↦ P(M̂ ≥ T')` over sampled times; censored horizons count
/// as exceeding every `T'`.
pub fn containment_tail(horizons: &[Option<usize>], grid: &[usize]) -> Vec<(usize, f64)> {
    let n = horizons.len().max(1) as f64;
    grid.iter()
        .map(|&tp| {
            let c = horizons.iter().filter(|h| h.is_none_or(|m| m >= tp)).count();
            (tp, c as f64 / n)
        })
        .collect()
}
