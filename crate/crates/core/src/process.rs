//! The adaptive process `(Γ_t, X_t)`, its finite-adaptation comparison
//! process and replica ensembles.
//!
//! Each run splits its stream into three lanes: kernel noise, adaptation
//! draws and initialization. Freezing a policy therefore never shifts the
//! kernel noise, and the finite-adaptation run shares its prefix with
//! [`run_adaptive`] bit for bit.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::adaptation::{adapt, AdaptationPolicy, HistorySummary};
use crate::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, State, TuningParam};
use crate::rng::RngStream;

pub const KERNEL_LANE: u64 = 0;
pub const ADAPT_LANE: u64 = 1;
pub const INIT_LANE: u64 = 2;

pub type StateSampler = Arc<dyn Fn(&mut RngStream) -> State + Send + Sync>;

/// Initialization `(γ₀, x₀)` or `γ₀` with a sampler for `X₀`.
#[derive(Clone)]
pub enum Init {
    Point(TuningParam, State),
    Sampled(TuningParam, StateSampler),
}

impl fmt::Debug for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Init::Point(g, x) => f.debug_tuple("Point").field(g).field(x).finish(),
            Init::Sampled(g, _) => f.debug_tuple("Sampled").field(g).field(&"<fn>").finish(),
        }
    }
}

impl Init {
    pub fn tuning(&self) -> &TuningParam {
        match self {
            Init::Point(g, _) | Init::Sampled(g, _) => g,
        }
    }

    fn draw(&self, stream: &mut RngStream) -> (TuningParam, State) {
        match self {
            Init::Point(g, x) => (g.clone(), x.clone()),
            Init::Sampled(g, f) => (g.clone(), f(stream)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub tuning: TuningParam,
    pub state: State,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveTrajectory {
    pub records: Vec<StepRecord>,
    pub seed: u64,
    pub stream_id: u64,
}

impl AdaptiveTrajectory {
    pub fn horizon(&self) -> usize {
        self.records.len() - 1
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.records.iter().map(|r| &r.state)
    }

    pub fn tunings(&self) -> impl Iterator<Item = &TuningParam> {
        self.records.iter().map(|r| &r.tuning)
    }

    /// Replays the freeze rules of `policy`: wherever the policy is frozen at
    /// time `t`, `Γ_{t+1}` must equal `Γ_t`.
    pub fn verify_freeze(&self, kernel: &KernelFamily, policy: &AdaptationPolicy) -> Result<()> {
        for w in self.records.windows(2) {
            let coords = kernel.embed(&w[0].state)?;
            if policy.is_frozen(w[0].t, &coords) && w[1].tuning != w[0].tuning {
                return Err(Error::DomainError(format!(
                    "tuning changed at t = {} although the policy is frozen",
                    w[1].t
                )));
            }
        }
        Ok(())
    }
}

/// Drives the process for `horizon` steps, calling `visit` on every
/// `(t, Γ_t, X_t)` including `t = 0`.
pub fn simulate(
    kernel: &KernelFamily,
    policy: &AdaptationPolicy,
    init: &Init,
    horizon: usize,
    stream: &RngStream,
    mut visit: impl FnMut(usize, &TuningParam, &State) -> Result<()>,
) -> Result<()> {
    policy.validate()?;
    let mut kernel_rng = stream.split(KERNEL_LANE);
    let mut adapt_rng = stream.split(ADAPT_LANE);
    let mut init_rng = stream.split(INIT_LANE);
    let (g0, x0) = init.draw(&mut init_rng);
    kernel.validate_tuning(&g0)?;
    let c0 = kernel.embed(&x0)?;
    visit(0, &g0, &x0)?;
    let mut hist = HistorySummary::new(g0, x0, c0);
    for t in 1..=horizon {
        let g = adapt(policy, &hist, &mut adapt_rng)?;
        if g != hist.tuning {
            kernel.validate_tuning(&g)?;
        }
        let x = kernel.step(&hist.state, &g, &mut kernel_rng)?;
        visit(t, &g, &x)?;
        let c = kernel.embed(&x)?;
        hist.observe(g, x, c);
    }
    Ok(())
}

pub fn run_adaptive(
    kernel: &KernelFamily,
    policy: &AdaptationPolicy,
    init: &Init,
    horizon: usize,
    stream: &RngStream,
) -> Result<AdaptiveTrajectory> {
    let mut records = Vec::with_capacity(horizon + 1);
    simulate(kernel, policy, init, horizon, stream, |t, g, x| {
        records.push(StepRecord {
            t,
            tuning: g.clone(),
            state: x.clone(),
        });
        Ok(())
    })?;
    Ok(AdaptiveTrajectory {
        records,
        seed: stream.seed(),
        stream_id: stream.stream_id(),
    })
}

/// Adapts through `t_stop`, then runs `extra_steps` Markov steps with the
/// tuning frozen at `Γ_{t_stop}`.
pub fn run_finite_adaptation(
    kernel: &KernelFamily,
    policy: &AdaptationPolicy,
    init: &Init,
    t_stop: usize,
    extra_steps: usize,
    stream: &RngStream,
) -> Result<AdaptiveTrajectory> {
    let mut frozen = policy.clone();
    frozen.finite_stop = Some(policy.finite_stop.map_or(t_stop, |s| s.min(t_stop)));
    run_adaptive(kernel, &frozen, init, t_stop + extra_steps, stream)
}

/// States of all replicas at one checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleCrossSection {
    pub t: usize,
    pub measure: EmpiricalMeasure,
    pub states: Vec<State>,
    pub tunings: Vec<TuningParam>,
}

impl EnsembleCrossSection {
    pub fn replicas(&self) -> usize {
        self.states.len()
    }
}

/// Runs `replicas` independent copies, replica `r` on `base.split(r)`, and
/// collects their cross-sections at `checkpoints`.
pub fn run_ensemble(
    kernel: &KernelFamily,
    policy: &AdaptationPolicy,
    init: &Init,
    horizon: usize,
    replicas: usize,
    checkpoints: &[usize],
    base: &RngStream,
) -> Result<Vec<EnsembleCrossSection>> {
    if replicas < 2 {
        return Err(Error::ParamOutOfRange(format!("ensemble needs at least 2 replicas, got {replicas}")));
    }
    if let Some(&t) = checkpoints.iter().find(|&&t| t > horizon) {
        return Err(Error::ParamOutOfRange(format!("checkpoint {t} beyond horizon {horizon}")));
    }
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let per_replica = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let stream = base.split(r as u64);
            let mut out = Vec::with_capacity(sorted.len());
            let mut next = 0;
            let last = sorted.last().copied().unwrap_or(0);
            simulate(kernel, policy, init, last, &stream, |t, g, x| {
                if next < sorted.len() && sorted[next] == t {
                    out.push((g.clone(), x.clone()));
                    next += 1;
                }
                Ok(())
            })?;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sections = Vec::with_capacity(sorted.len());
    for (k, &t) in sorted.iter().enumerate() {
        let mut states = Vec::with_capacity(replicas);
        let mut tunings = Vec::with_capacity(replicas);
        let mut points = Vec::with_capacity(replicas);
        for rep in &per_replica {
            let (g, x) = &rep[k];
            points.push(kernel.embed(x)?);
            states.push(x.clone());
            tunings.push(g.clone());
        }
        sections.push(EnsembleCrossSection {
            t,
            measure: EmpiricalMeasure::uniform(points)?,
            states,
            tunings,
        });
    }
    Ok(sections)
}
