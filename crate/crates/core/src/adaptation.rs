//! History-driven tuning updates `Γ_{t+1} ~ Q_{t+1}(H_t, ·)`.
//!
//! A policy is a list of rules applied in order to the current tuning, plus
//! two freeze conditions: a finite adaptation horizon and a restriction set
//! outside of which the tuning is held fixed.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{State, TuningParam};
use crate::linalg::PsdMatrix;
use crate::rng::RngStream;

/// A deterministic sequence `t ↦ c_t`.
#[derive(Clone, Debug, PartialEq)]
pub enum Schedule {
    /// `scale / (t + offset)`.
    Harmonic { scale: f64, offset: f64 },
    Constant(f64),
    /// `scale · (t + 1)^{-exponent}`.
    Power { scale: f64, exponent: f64 },
}

impl Schedule {
    pub fn value(&self, t: usize) -> f64 {
        let t = t as f64;
        match self {
            Schedule::Harmonic { scale, offset } => scale / (t + offset),
            Schedule::Constant(c) => *c,
            Schedule::Power { scale, exponent } => scale * (t + 1.0).powf(-exponent),
        }
    }

    /// Probability-valued evaluation, clamped to `[0, 1]`.
    pub fn probability(&self, t: usize) -> f64 {
        self.value(t).clamp(0.0, 1.0)
    }

    pub fn vanishes(&self) -> bool {
        match self {
            Schedule::Harmonic { .. } => true,
            Schedule::Constant(c) => *c == 0.0,
            Schedule::Power { scale, exponent } => *scale == 0.0 || *exponent > 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Schedule::Harmonic { scale, offset } => *scale >= 0.0 && *offset > 0.0,
            Schedule::Constant(c) => *c >= 0.0,
            Schedule::Power { scale, exponent } => *scale >= 0.0 && *exponent >= 0.0,
        };
        if !ok {
            return Err(Error::ParamOutOfRange(format!("invalid schedule {self:?}")));
        }
        Ok(())
    }
}

/// Which running moment the matrix rule tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentTarget {
    Covariance,
    Precision,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AdaptationRule {
    /// With probability `p_t`, redraw uniformly among the other candidates.
    BernoulliRedraw {
        schedule: Schedule,
        candidates: Vec<TuningParam>,
    },
    /// `γ ← clamp(γ + c_t (2U − 1), lo, hi)` for AR coefficients.
    Jitter { schedule: Schedule, lo: f64, hi: f64 },
    /// `M ← proj_[lo,hi]((1 − c_t) M + c_t · scale · Ŝ_t)` where `Ŝ_t` is the
    /// running covariance or its inverse.
    MomentMatching {
        target: MomentTarget,
        schedule: Schedule,
        scale: f64,
        lo: f64,
        hi: f64,
    },
    /// `h_t = h* + (h_0 − h*) / (t + 1)`.
    StepSchedule { h0: f64, h_star: f64 },
    /// `Γ_t` alternates between two values regardless of the history.
    Alternating { even: TuningParam, odd: TuningParam },
}

/// The restriction set `S = {x : ‖x‖ ≤ radius}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestrictedSet {
    pub radius: f64,
}

impl RestrictedSet {
    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.iter().map(|v| v * v).sum::<f64>().sqrt() <= self.radius
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct AdaptationPolicy {
    pub rules: Vec<AdaptationRule>,
    pub finite_stop: Option<usize>,
    pub restriction: Option<RestrictedSet>,
}

impl AdaptationPolicy {
    /// No adaptation: `Γ_t = Γ_0`.
    pub fn frozen() -> Self {
        Self::default()
    }

    pub fn with_rule(mut self, rule: AdaptationRule) -> Self {
        self.rules.push(rule);
        self
    }

    /// Freezes the tuning from time `t_stop` on.
    pub fn with_finite_stop(mut self, t_stop: usize) -> Self {
        self.finite_stop = Some(t_stop);
        self
    }

    pub fn with_restriction(mut self, radius: f64) -> Self {
        self.restriction = Some(RestrictedSet { radius });
        self
    }

    pub fn bernoulli(schedule: Schedule, candidates: Vec<TuningParam>) -> Self {
        Self::frozen().with_rule(AdaptationRule::BernoulliRedraw {
            schedule,
            candidates,
        })
    }

    pub fn step_schedule(h0: f64, h_star: f64) -> Self {
        Self::frozen().with_rule(AdaptationRule::StepSchedule { h0, h_star })
    }

    pub fn alternating(even: TuningParam, odd: TuningParam) -> Self {
        Self::frozen().with_rule(AdaptationRule::Alternating { even, odd })
    }

    /// True when the tuning must be held at time `t` (the update producing
    /// `Γ_{t+1}`) for a chain currently at `coords`.
    pub fn is_frozen(&self, t: usize, coords: &[f64]) -> bool {
        if self.finite_stop.is_some_and(|s| t >= s) {
            return true;
        }
        self.restriction.is_some_and(|r| !r.contains(coords))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.restriction {
            if !(r.radius >= 0.0) {
                return Err(Error::ParamOutOfRange(format!(
                    "restriction radius {} must be nonnegative",
                    r.radius
                )));
            }
        }
        for rule in &self.rules {
            match rule {
                AdaptationRule::BernoulliRedraw {
                    schedule,
                    candidates,
                } => {
                    schedule.validate()?;
                    if candidates.is_empty() {
                        return Err(Error::ParamOutOfRange("empty candidate set".into()));
                    }
                    if candidates.iter().any(|c| !c.same_variant(&candidates[0])) {
                        return Err(Error::VariantMismatch("candidates mix tuning variants".into()));
                    }
                }
                AdaptationRule::Jitter { schedule, lo, hi } => {
                    schedule.validate()?;
                    if !(0.0 < *lo && lo <= hi && *hi < 1.0) {
                        return Err(Error::ParamOutOfRange(format!(
                            "jitter bounds [{lo}, {hi}] must lie in (0, 1)"
                        )));
                    }
                }
                AdaptationRule::MomentMatching {
                    schedule,
                    scale,
                    lo,
                    hi,
                    ..
                } => {
                    schedule.validate()?;
                    if !(*scale > 0.0 && 0.0 < *lo && lo <= hi) {
                        return Err(Error::ParamOutOfRange(format!(
                            "moment matching needs scale > 0 and 0 < lo <= hi, got {scale}, [{lo}, {hi}]"
                        )));
                    }
                }
                AdaptationRule::StepSchedule { h0, h_star } => {
                    if !(*h_star > 0.0 && h0 >= h_star) {
                        return Err(Error::ParamOutOfRange(format!(
                            "step schedule needs 0 < h* <= h0, got h0 = {h0}, h* = {h_star}"
                        )));
                    }
                }
                AdaptationRule::Alternating { even, odd } => {
                    if !even.same_variant(odd) {
                        return Err(Error::VariantMismatch("alternating values differ in variant".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Running summary of the history `H_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct HistorySummary {
    pub t: usize,
    pub state: State,
    pub coords: Vec<f64>,
    pub tuning: TuningParam,
    /// Number of observed states `X_0, …, X_t`.
    pub count: usize,
    pub mean: Vec<f64>,
    /// Row-major `d × d` running mean of `x xᵀ`.
    pub second_moment: Vec<f64>,
}

impl HistorySummary {
    pub fn new(tuning: TuningParam, state: State, coords: Vec<f64>) -> Self {
        let d = coords.len();
        let mut second_moment = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                second_moment[i * d + j] = coords[i] * coords[j];
            }
        }
        Self {
            t: 0,
            state,
            mean: coords.clone(),
            coords,
            tuning,
            count: 1,
            second_moment,
        }
    }

    /// Records `(Γ_{t+1}, X_{t+1})`.
    pub fn observe(&mut self, tuning: TuningParam, state: State, coords: Vec<f64>) {
        let d = self.mean.len();
        self.t += 1;
        self.count += 1;
        let w = 1.0 / self.count as f64;
        for i in 0..d {
            self.mean[i] += w * (coords[i] - self.mean[i]);
            for j in 0..d {
                let k = i * d + j;
                self.second_moment[k] += w * (coords[i] * coords[j] - self.second_moment[k]);
            }
        }
        self.tuning = tuning;
        self.state = state;
        self.coords = coords;
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.mean.len();
        DMatrix::from_fn(d, d, |i, j| self.second_moment[i * d + j] - self.mean[i] * self.mean[j])
    }
}

fn redraw(current: &TuningParam, candidates: &[TuningParam], stream: &mut RngStream) -> TuningParam {
    let others: Vec<&TuningParam> = candidates.iter().filter(|c| *c != current).collect();
    if others.is_empty() {
        return current.clone();
    }
    others[stream.below(others.len())].clone()
}

fn moment_update(
    m: &PsdMatrix,
    hist: &HistorySummary,
    target: MomentTarget,
    c: f64,
    scale: f64,
    lo: f64,
    hi: f64,
) -> Result<PsdMatrix> {
    if hist.mean.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: hist.mean.len(),
        });
    }
    if hist.count < 2 {
        return Ok(m.clone());
    }
    let cov = hist.covariance();
    let cov = PsdMatrix::new((&cov + cov.transpose()) * 0.5).unwrap_or_else(|_| m.clone());
    let est = match target {
        MomentTarget::Covariance => cov.into_matrix(),
        MomentTarget::Precision => match cov.inverse(1e-12) {
            Some(p) => p,
            None => return Ok(m.clone()),
        },
    };
    let blended = m.as_matrix() * (1.0 - c) + est * (c * scale);
    let blended = PsdMatrix::new((&blended + blended.transpose()) * 0.5)?;
    Ok(blended.project_eigen_box(lo, hi))
}

fn apply_rule(
    rule: &AdaptationRule,
    current: &TuningParam,
    hist: &HistorySummary,
    stream: &mut RngStream,
) -> Result<TuningParam> {
    let next_t = hist.t + 1;
    match rule {
        AdaptationRule::BernoulliRedraw {
            schedule,
            candidates,
        } => {
            if let Some(c) = candidates.first() {
                if !c.same_variant(current) {
                    return Err(Error::VariantMismatch(format!(
                        "candidates are {} but the tuning is {}",
                        c.variant_name(),
                        current.variant_name()
                    )));
                }
            }
            let p = schedule.probability(hist.t);
            if stream.uniform() < p {
                Ok(redraw(current, candidates, stream))
            } else {
                Ok(current.clone())
            }
        }
        AdaptationRule::Jitter { schedule, lo, hi } => match current {
            TuningParam::ArCoef(g) => {
                let u = stream.uniform();
                let c = schedule.value(hist.t);
                Ok(TuningParam::ArCoef((g + c * (2.0 * u - 1.0)).clamp(*lo, *hi)))
            }
            other => Err(Error::VariantMismatch(format!(
                "jitter applies to ArCoef, got {}",
                other.variant_name()
            ))),
        },
        AdaptationRule::MomentMatching {
            target,
            schedule,
            scale,
            lo,
            hi,
        } => {
            let c = schedule.value(hist.t).clamp(0.0, 1.0);
            match current {
                TuningParam::MatrixScale(m) => Ok(TuningParam::MatrixScale(moment_update(
                    m, hist, *target, c, *scale, *lo, *hi,
                )?)),
                TuningParam::Langevin { m, h } => Ok(TuningParam::Langevin {
                    m: moment_update(m, hist, *target, c, *scale, *lo, *hi)?,
                    h: *h,
                }),
                other => Err(Error::VariantMismatch(format!(
                    "moment matching applies to matrix tunings, got {}",
                    other.variant_name()
                ))),
            }
        }
        AdaptationRule::StepSchedule { h0, h_star } => match current {
            TuningParam::Langevin { m, .. } => Ok(TuningParam::Langevin {
                m: m.clone(),
                h: step_size(*h0, *h_star, next_t),
            }),
            other => Err(Error::VariantMismatch(format!(
                "step schedule applies to Langevin tunings, got {}",
                other.variant_name()
            ))),
        },
        AdaptationRule::Alternating { even, odd } => {
            let next = if next_t % 2 == 0 { even } else { odd };
            if !next.same_variant(current) {
                return Err(Error::VariantMismatch(format!(
                    "alternating value {} does not match tuning {}",
                    next.variant_name(),
                    current.variant_name()
                )));
            }
            Ok(next.clone())
        }
    }
}

/// `h* + (h_0 − h*) / (t + 1)`.
pub fn step_size(h0: f64, h_star: f64, t: usize) -> f64 {
    h_star + (h0 - h_star) / (t as f64 + 1.0)
}

/// Draws `Γ_{t+1}` given the summary of `H_t`. Frozen policies return the
/// current tuning without consuming randomness.
pub fn adapt(policy: &AdaptationPolicy, hist: &HistorySummary, stream: &mut RngStream) -> Result<TuningParam> {
    if policy.is_frozen(hist.t, &hist.coords) {
        return Ok(hist.tuning.clone());
    }
    let mut g = hist.tuning.clone();
    for rule in &policy.rules {
        g = apply_rule(rule, &g, hist, stream)?;
    }
    Ok(g)
}

/// Pooled window `[start, end)` of the audit.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditWindow {
    pub start: usize,
    pub end: usize,
    /// Estimated `P(|Γ_{t+1} − Γ_t| > η)` per threshold, averaged over the window.
    pub exceed: Vec<f64>,
}

impl AuditWindow {
    pub fn center(&self) -> f64 {
        ((self.start.max(1) as f64) * (self.end.max(1) as f64)).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub etas: Vec<f64>,
    pub windows: Vec<AuditWindow>,
    /// Log-log slope of the change probability at the smallest threshold over
    /// the second half of the horizon (on a log scale); `None` when no
    /// change was observed there.
    pub slope: Option<f64>,
    pub non_diminishing: bool,
}

/// Slope above which the audit flags a non-diminishing schedule.
pub const NON_DIMINISHING_SLOPE: f64 = -0.25;

/// Least-squares slope of `ys` on `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Log-spaced windows covering `[0, horizon)`, ten per decade.
fn audit_windows(horizon: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0usize;
    let ratio = 10f64.powf(0.1);
    while start < horizon {
        let end = ((start.max(1) as f64 * ratio).ceil() as usize).max(start + 1).min(horizon);
        out.push((start, end));
        start = end;
    }
    out
}

/// Runs the tuning sequence alone (the state is held at `state`) over
/// `replicas` independent streams and estimates, per log-spaced window, the
/// probability that a change exceeds each `η`.
pub fn da_schedule_audit(
    policy: &AdaptationPolicy,
    init: &TuningParam,
    state: (&State, &[f64]),
    horizon: usize,
    replicas: usize,
    etas: &[f64],
    stream: &RngStream,
) -> Result<AuditReport> {
    use rayon::prelude::*;
    if horizon == 0 || replicas == 0 || etas.is_empty() {
        return Err(Error::ParamOutOfRange(
            "audit needs horizon, replicas and thresholds".into(),
        ));
    }
    policy.validate()?;
    let windows = audit_windows(horizon);
    let counts = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<Vec<u64>>> {
            let mut rng = stream.split(r as u64);
            let mut hist = HistorySummary::new(init.clone(), state.0.clone(), state.1.to_vec());
            let mut c = vec![vec![0u64; etas.len()]; windows.len()];
            let mut w = 0;
            for t in 0..horizon {
                while t >= windows[w].1 {
                    w += 1;
                }
                let next = adapt(policy, &hist, &mut rng)?;
                let mag = next.distance(&hist.tuning)?;
                for (k, eta) in etas.iter().enumerate() {
                    if mag > *eta {
                        c[w][k] += 1;
                    }
                }
                hist.observe(next, state.0.clone(), state.1.to_vec());
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(windows.len());
    for (w, &(s, e)) in windows.iter().enumerate() {
        let denom = (replicas * (e - s)) as f64;
        let exceed = (0..etas.len())
            .map(|k| counts.iter().map(|c| c[w][k]).sum::<u64>() as f64 / denom)
            .collect();
        out.push(AuditWindow {
            start: s,
            end: e,
            exceed,
        });
    }
    let k_min = (0..etas.len())
        .min_by(|&a, &b| etas[a].total_cmp(&etas[b]))
        .unwrap_or(0);
    let lo = (horizon as f64).sqrt();
    let (xs, ys): (Vec<f64>, Vec<f64>) = out
        .iter()
        .filter(|w| w.start as f64 >= lo && w.exceed[k_min] > 0.0)
        .map(|w| (w.center().ln(), w.exceed[k_min].ln()))
        .unzip();
    let late_changes = out
        .iter()
        .filter(|w| w.start as f64 >= lo)
        .any(|w| w.exceed[k_min] > 0.0);
    let slope = ols_slope(&xs, &ys);
    let non_diminishing = late_changes && slope.is_none_or(|s| s > NON_DIMINISHING_SLOPE);
    Ok(AuditReport {
        etas: etas.to_vec(),
        windows: out,
        slope,
        non_diminishing,
    })
}
