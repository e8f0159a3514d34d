//! JSON experiment schema and its validation.

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::adaptation::{AdaptationPolicy, AdaptationRule, MomentTarget, Schedule};
use crate::kernels::{
    Diffusion, DiscreteRwm, GaussianAr, KernelFamily, Potential, RegularGrid, State, TuningParam, Ula,
    DEFAULT_SUBSTEPS, DEFAULT_TRUNC_TOL,
};
use crate::linalg::PsdMatrix;
use crate::process::Init;
use crate::transport::GroundMetric;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Distance,
    Containment,
    Diminishing,
    Drift,
    Lln,
    ArBounds,
    Harris,
    HarrisVerify,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Distance => "distance",
            ExperimentKind::Containment => "containment",
            ExperimentKind::Diminishing => "diminishing",
            ExperimentKind::Drift => "drift",
            ExperimentKind::Lln => "lln",
            ExperimentKind::ArBounds => "ar-bounds",
            ExperimentKind::Harris => "harris",
            ExperimentKind::HarrisVerify => "harris-verify",
        }
    }

    fn needs_process(self) -> bool {
        !matches!(self, ExperimentKind::ArBounds | ExperimentKind::Harris | ExperimentKind::HarrisVerify)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSpec {
    Diag(Vec<f64>),
    Full(Vec<Vec<f64>>),
}

impl MatrixSpec {
    pub fn build(&self) -> crate::Result<PsdMatrix> {
        match self {
            MatrixSpec::Diag(d) => PsdMatrix::diag(d),
            MatrixSpec::Full(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(crate::Error::DimensionError(format!("matrix rows must all have length {n}")));
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                PsdMatrix::new(nalgebra::DMatrix::from_row_slice(n, n, &flat))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Values(Vec<f64>),
    /// `exp(−‖x − center‖² / (2 scale²))`.
    Gaussian { center: Vec<f64>, scale: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    DiscreteAr,
    GaussianAr {
        cov: MatrixSpec,
        gamma_max: f64,
    },
    DiscreteRwm {
        origin: Vec<f64>,
        spacing: Vec<f64>,
        counts: Vec<usize>,
        target: TargetSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trunc_tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eigen_box: Option<(f64, f64)>,
    },
    Ula {
        hessian: MatrixSpec,
        h_min: f64,
    },
    Diffusion {
        hessian: MatrixSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        substeps: Option<usize>,
    },
}

impl KernelSpec {
    pub fn build(&self) -> crate::Result<KernelFamily> {
        Ok(match self {
            KernelSpec::DiscreteAr => KernelFamily::DiscreteAr,
            KernelSpec::GaussianAr { cov, gamma_max } => KernelFamily::GaussianAr(GaussianAr::new(cov.build()?, *gamma_max)?),
            KernelSpec::DiscreteRwm {
                origin,
                spacing,
                counts,
                target,
                trunc_tol,
                eigen_box,
            } => {
                let grid = RegularGrid::new(origin.clone(), spacing.clone(), counts.clone())?;
                let tol = trunc_tol.unwrap_or(DEFAULT_TRUNC_TOL);
                let k = match target {
                    TargetSpec::Values(v) => DiscreteRwm::from_values(grid, v.clone(), tol)?,
                    TargetSpec::Gaussian { center, scale } => {
                        let (c, s) = (center.clone(), *scale);
                        DiscreteRwm::new(
                            grid,
                            move |p| {
                                let r2: f64 = p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                                (-r2 / (2.0 * s * s)).exp()
                            },
                            tol,
                        )?
                    }
                };
                KernelFamily::DiscreteRwm(match eigen_box {
                    Some((lo, hi)) => k.with_eigen_box(*lo, *hi),
                    None => k,
                })
            }
            KernelSpec::Ula { hessian, h_min } => {
                KernelFamily::Ula(Ula::new(Potential::quadratic(hessian.build()?)?, *h_min)?)
            }
            KernelSpec::Diffusion { hessian, substeps } => KernelFamily::Diffusion(Diffusion::new(
                Potential::quadratic(hessian.build()?)?,
                substeps.unwrap_or(DEFAULT_SUBSTEPS),
            )?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TuningSpec {
    DiscreteBase(u32),
    ArCoef(f64),
    MatrixScale(MatrixSpec),
    Langevin { m: MatrixSpec, h: f64 },
}

impl TuningSpec {
    pub fn build(&self) -> crate::Result<TuningParam> {
        Ok(match self {
            TuningSpec::DiscreteBase(g) => TuningParam::DiscreteBase(*g),
            TuningSpec::ArCoef(g) => TuningParam::ArCoef(*g),
            TuningSpec::MatrixScale(m) => TuningParam::MatrixScale(m.build()?),
            TuningSpec::Langevin { m, h } => TuningParam::Langevin { m: m.build()?, h: *h },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Real(f64),
    Vector(Vec<f64>),
    Grid(usize),
}

impl StateSpec {
    pub fn build(&self) -> State {
        match self {
            StateSpec::Real(x) => State::Real(*x),
            StateSpec::Vector(v) => State::vector(v),
            StateSpec::Grid(i) => State::Grid(*i),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    pub tuning: TuningSpec,
    pub state: StateSpec,
}

impl InitSpec {
    pub fn build(&self) -> crate::Result<Init> {
        Ok(Init::Point(self.tuning.build()?, self.state.build()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Harmonic { scale: f64, offset: f64 },
    Constant(f64),
    Power { scale: f64, exponent: f64 },
}

impl ScheduleSpec {
    fn build(&self) -> Schedule {
        match self {
            ScheduleSpec::Harmonic { scale, offset } => Schedule::Harmonic {
                scale: *scale,
                offset: *offset,
            },
            ScheduleSpec::Constant(c) => Schedule::Constant(*c),
            ScheduleSpec::Power { scale, exponent } => Schedule::Power {
                scale: *scale,
                exponent: *exponent,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSpec {
    Covariance,
    Precision,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    BernoulliRedraw {
        schedule: ScheduleSpec,
        candidates: Vec<TuningSpec>,
    },
    Jitter {
        schedule: ScheduleSpec,
        lo: f64,
        hi: f64,
    },
    MomentMatching {
        target: MomentSpec,
        schedule: ScheduleSpec,
        scale: f64,
        lo: f64,
        hi: f64,
    },
    StepSchedule {
        h0: f64,
        h_star: f64,
    },
    Alternating {
        even: TuningSpec,
        odd: TuningSpec,
    },
}

impl RuleSpec {
    fn build(&self) -> crate::Result<AdaptationRule> {
        Ok(match self {
            RuleSpec::BernoulliRedraw { schedule, candidates } => AdaptationRule::BernoulliRedraw {
                schedule: schedule.build(),
                candidates: candidates.iter().map(TuningSpec::build).collect::<crate::Result<_>>()?,
            },
            RuleSpec::Jitter { schedule, lo, hi } => AdaptationRule::Jitter {
                schedule: schedule.build(),
                lo: *lo,
                hi: *hi,
            },
            RuleSpec::MomentMatching {
                target,
                schedule,
                scale,
                lo,
                hi,
            } => AdaptationRule::MomentMatching {
                target: match target {
                    MomentSpec::Covariance => MomentTarget::Covariance,
                    MomentSpec::Precision => MomentTarget::Precision,
                },
                schedule: schedule.build(),
                scale: *scale,
                lo: *lo,
                hi: *hi,
            },
            RuleSpec::StepSchedule { h0, h_star } => AdaptationRule::StepSchedule {
                h0: *h0,
                h_star: *h_star,
            },
            RuleSpec::Alternating { even, odd } => AdaptationRule::Alternating {
                even: even.build()?,
                odd: odd.build()?,
            },
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default)]
    pub rules: Vec<RuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_stop: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restriction_radius: Option<f64>,
}

impl PolicySpec {
    pub fn build(&self) -> crate::Result<AdaptationPolicy> {
        let mut p = AdaptationPolicy::frozen();
        for r in &self.rules {
            p = p.with_rule(r.build()?);
        }
        p.finite_stop = self.finite_stop;
        if let Some(r) = self.restriction_radius {
            p = p.with_restriction(r);
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSpec {
    Euclidean,
    Scaled(f64),
    Discrete,
}

impl MetricSpec {
    pub fn build(&self) -> GroundMetric {
        match self {
            MetricSpec::Euclidean => GroundMetric::Euclidean,
            MetricSpec::Scaled(s) => GroundMetric::Scaled(*s),
            MetricSpec::Discrete => GroundMetric::Discrete,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Exact transport above this many atoms per side is subsampled (0: never).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ArExampleSpec {
    Discrete { gamma: u32, x: f64 },
    Gaussian { cov: MatrixSpec, gamma: f64, x: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftFnSpec {
    NormSq,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiSpec {
    FirstCoordinate,
    CappedNorm,
    Constant(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    Bounded,
    W1,
    Sliced,
}

/// Per-experiment parameters; each kind reads the fields it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<DistanceMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs_per_delta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws_per_pair: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_fn: Option<DriftFnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_points: Option<Vec<StateSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tunings: Option<Vec<TuningSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_point: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<ArExampleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_tunings: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub params: Params,
}

/// One schema violation: the offending field path and the reason.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub reason: String,
}

impl Violation {
    fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

/// Parses and validates a JSON config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let msg = e.inner().to_string();
        if let Some(rest) = msg.strip_prefix("unknown field `") {
            let name = rest.split('`').next().unwrap_or_default().to_string();
            CliError::UnknownField { path, name }
        } else {
            CliError::Schema(vec![Violation::new(path, msg)])
        }
    })?;
    let violations = cfg.validate();
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Schema(violations))
    }
}

impl ExperimentConfig {
    /// Semantic checks beyond the schema, all collected.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let kind = self.kind;
        let p = &self.params;
        if kind.needs_process() {
            if self.kernel.is_none() {
                v.push(Violation::new("kernel", format!("required for {}", kind.name())));
            }
            if self.init.is_none() {
                v.push(Violation::new("init", format!("required for {}", kind.name())));
            }
        }
        let kernel = match self.kernel.as_ref().map(KernelSpec::build) {
            Some(Ok(k)) => Some(k),
            Some(Err(e)) => {
                v.push(Violation::new("kernel", e.to_string()));
                None
            }
            None => None,
        };
        if let Some(policy) = &self.policy {
            if let Err(e) = policy.build() {
                v.push(Violation::new("policy", e.to_string()));
            }
        }
        if let (Some(k), Some(init)) = (&kernel, &self.init) {
            match init.tuning.build() {
                Ok(g) => {
                    if let Err(e) = k.validate_tuning(&g) {
                        let reason = match (&e, k) {
                            (crate::Error::StepSizeOutOfRange { h, h_min, h_max }, _) => format!(
                                "step size h = {h} violates the Langevin step-size constraint h in H = [h*, 1/(alpha+beta)] = [{h_min}, {h_max}]"
                            ),
                            _ => e.to_string(),
                        };
                        v.push(Violation::new("init.tuning", reason));
                    }
                }
                Err(e) => v.push(Violation::new("init.tuning", e.to_string())),
            }
            if let Err(e) = k.embed(&init.state.build()) {
                v.push(Violation::new("init.state", e.to_string()));
            }
        }
        if let (Some(h), Some(cps)) = (self.horizon, &self.checkpoints) {
            if let Some(t) = cps.iter().find(|&&t| t > h) {
                v.push(Violation::new("checkpoints", format!("checkpoint {t} exceeds horizon {h}")));
            }
        }
        let need = |v: &mut Vec<Violation>, present: bool, name: &str| {
            if !present {
                v.push(Violation::new(format!("params.{name}"), format!("required for {}", kind.name())));
            }
        };
        match kind {
            ExperimentKind::Simulate | ExperimentKind::Diminishing => {
                need(&mut v, self.horizon.is_some(), "horizon");
            }
            ExperimentKind::Distance => {
                need(&mut v, self.horizon.is_some(), "horizon");
                need(&mut v, self.replicas.is_some_and(|r| r >= 2), "replicas");
            }
            ExperimentKind::Containment => {
                need(&mut v, p.eps.is_some_and(|e| e > 0.0 && e < 1.0), "eps");
                need(&mut v, p.n_max.is_some(), "n_max");
            }
            ExperimentKind::Drift => {
                need(&mut v, p.test_points.as_ref().is_some_and(|t| !t.is_empty()), "test_points");
            }
            ExperimentKind::Lln => {
                need(&mut v, p.t_grid.as_ref().is_some_and(|t| !t.is_empty()), "t_grid");
                need(&mut v, p.phi.is_some(), "phi");
                need(&mut v, p.reference_value.is_some(), "reference_value");
                need(&mut v, self.replicas.is_some_and(|r| r >= 2), "replicas");
            }
            ExperimentKind::ArBounds => {
                need(&mut v, p.example.is_some(), "example");
                need(&mut v, p.t_max.is_some(), "t_max");
            }
            ExperimentKind::Harris => {
                for (name, val) in [("lambda", p.lambda), ("k", p.k), ("kappa", p.kappa), ("alpha", p.alpha), ("delta", p.delta)] {
                    need(&mut v, val.is_some(), name);
                }
            }
            ExperimentKind::HarrisVerify => {
                need(&mut v, p.chains.is_some_and(|c| c >= 1), "chains");
                need(&mut v, p.states.is_some_and(|s| (1..=crate::diagnostics::MAX_STATES).contains(&s)), "states");
            }
        }
        v
    }

    /// Hex SHA-256 of the canonical serialization, excluding the output directory.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut c = self.clone();
        c.output_dir = None;
        let text = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_simulate_is_valid() {
        let cfg = parse_config(
            r#"{"kind":"simulate","seed":1,"kernel":{"family":"discrete_ar"},
                "init":{"tuning":{"discrete_base":2},"state":{"real":0.0}},"horizon":100}"#,
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Simulate);
        assert_eq!(cfg.horizon, Some(100));
    }

    #[test]
    fn missing_seed_is_named() {
        let err = parse_config(r#"{"kind":"simulate","horizon":100}"#).unwrap_err();
        match err {
            CliError::Schema(v) => assert!(v[0].reason.contains("seed"), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let err = parse_config(r#"{"kind":"harris","seed":1,"colour":3}"#).unwrap_err();
        assert!(matches!(err, CliError::UnknownField { ref name, .. } if name == "colour"), "{err:?}");
        let err = parse_config(r#"{"kind":"harris","seed":1,"params":{"lambdaa":0.5}}"#).unwrap_err();
        assert!(matches!(err, CliError::UnknownField { ref path, .. } if path.starts_with("params")), "{err:?}");
    }

    #[test]
    fn ula_step_outside_range_cites_constraint() {
        let err = parse_config(
            r#"{"kind":"simulate","seed":1,"horizon":10,
                "kernel":{"family":"ula","hessian":{"diag":[1.0,4.0]},"h_min":0.1},
                "init":{"tuning":{"langevin":{"m":{"diag":[1.0,1.0]},"h":0.5}},"state":{"vector":[0.0,0.0]}}}"#,
        )
        .unwrap_err();
        match err {
            CliError::Schema(v) => {
                assert_eq!(v[0].path, "init.tuning");
                assert!(v[0].reason.contains("1/(alpha+beta)"), "{v:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_listed() {
        let err = parse_config(r#"{"kind":"harris","seed":1,"params":{"lambda":0.5}}"#).unwrap_err();
        match err {
            CliError::Schema(v) => assert_eq!(v.len(), 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = parse_config(r#"{"kind":"harris","seed":1,"output_dir":"a","params":{"lambda":0.5,"k":1,"kappa":0.2,"alpha":0.2,"delta":0.1}}"#).unwrap();
        let mut b = a.clone();
        b.output_dir = Some("b".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
    }
}
