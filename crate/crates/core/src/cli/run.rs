//! Experiment dispatch and artifact writing.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{ArExampleSpec, DistanceMethod, DriftFnSpec, ExperimentConfig, ExperimentKind, PhiSpec};
use super::CliError;
use crate::diagnostics::{
    ar_bound_check, check_drift, containment_discrete_ar_exact, estimate_containment, estimate_diminishing,
    fit_harris_inputs, harris_constants, lln_curve, pilot_reference, random_reversible_chain, verify_harris_contraction,
    ArExample, ContainmentConfig, DiminishingConfig, TestFunction, DEFAULT_PAIRS,
};
use crate::empirical::EmpiricalMeasure;
use crate::kernels::{KernelFamily, State, TuningParam};
use crate::linalg::gaussian_sample;
use crate::process::{run_adaptive, run_ensemble, Init};
use crate::rng::{make_stream, RngStream};
use crate::transport::{bounded_distance, sliced_w1, transport_distance, CostSpec, GroundMetric};

/// Overrides every other choice of output directory.
pub const OUT_DIR_ENV: &str = "AMCMC_OUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub family: String,
    pub passed: bool,
    /// Failure of an enforced assertion is a run failure.
    pub enforced: bool,
    pub rows: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    pub values: BTreeMap<String, Value>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub summary: Summary,
    pub files: Vec<String>,
}

impl RunOutcome {
    pub fn check(&self) -> Result<(), CliError> {
        let failed: Vec<&str> = self
            .summary
            .assertions
            .iter()
            .filter(|a| a.enforced && !a.passed)
            .map(|a| a.family.as_str())
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Assertion(format!("bound check failed: {}", failed.join(", "))))
        }
    }
}

struct Table {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

struct Artifacts {
    tables: Vec<Table>,
    assertions: Vec<Assertion>,
    notes: Vec<String>,
    values: BTreeMap<String, Value>,
}

impl Artifacts {
    fn new() -> Self {
        Self {
            tables: Vec::new(),
            assertions: Vec::new(),
            notes: Vec::new(),
            values: BTreeMap::new(),
        }
    }

    fn value(&mut self, key: &str, v: impl Serialize) {
        self.values
            .insert(key.to_string(), serde_json::to_value(v).expect("serializable"));
    }

    fn assert(&mut self, family: &str, passed: bool, enforced: bool, rows: usize, detail: impl Into<String>) {
        self.assertions.push(Assertion {
            family: family.to_string(),
            passed,
            enforced,
            rows,
            detail: detail.into(),
        });
    }
}

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x}")
}

fn coord_columns(prefix: &[&str], dim: usize, suffix: &[&str]) -> Vec<String> {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain((0..dim).map(|i| format!("x{i}")))
        .chain(suffix.iter().map(|s| s.to_string()))
        .collect()
}

/// `AMCMC_OUT_DIR`, then the command-line flag, then the config, then `out`.
pub fn resolve_out_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(d) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(d);
    }
    if let Some(d) = flag {
        return d.to_path_buf();
    }
    PathBuf::from(cfg.output_dir.as_deref().unwrap_or("out"))
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    kernel: Option<KernelFamily>,
    policy: crate::adaptation::AdaptationPolicy,
    init: Option<(TuningParam, State)>,
    stream: RngStream,
}

impl Ctx<'_> {
    fn kernel(&self) -> Result<&KernelFamily, CliError> {
        self.kernel
            .as_ref()
            .ok_or_else(|| CliError::Runtime("kernel missing".into()))
    }

    fn point(&self) -> Result<(&TuningParam, &State), CliError> {
        self.init
            .as_ref()
            .map(|(g, x)| (g, x))
            .ok_or_else(|| CliError::Runtime("init missing".into()))
    }

    fn init(&self) -> Result<Init, CliError> {
        let (g, x) = self.point()?;
        Ok(Init::Point(g.clone(), x.clone()))
    }

    fn horizon(&self) -> usize {
        self.cfg.horizon.unwrap_or(0)
    }

    fn metric(&self) -> GroundMetric {
        self.cfg
            .metric
            .as_ref()
            .map(|m| m.build())
            .unwrap_or(GroundMetric::Euclidean)
    }

    fn subsample(&self) -> usize {
        self.cfg.tolerances.subsample.unwrap_or(0)
    }
}

/// Runs the configured experiment and writes its artifacts into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, CliError> {
    let violations = cfg.validate();
    if !violations.is_empty() {
        return Err(CliError::Schema(violations));
    }
    let started = SystemTime::now();
    let clock = Instant::now();
    let hash = cfg.hash();
    let init = match &cfg.init {
        Some(i) => Some((i.tuning.build()?, i.state.build())),
        None => None,
    };
    let ctx = Ctx {
        cfg,
        kernel: cfg.kernel.as_ref().map(|k| k.build()).transpose()?,
        policy: cfg.policy.clone().unwrap_or_default().build()?,
        init,
        stream: make_stream(cfg.seed, 0),
    };
    log::info!("running {} (config {})", cfg.kind.name(), &hash[..12]);
    let art = match cfg.kind {
        ExperimentKind::Simulate => simulate(&ctx)?,
        ExperimentKind::Distance => distance(&ctx)?,
        ExperimentKind::Containment => containment(&ctx)?,
        ExperimentKind::Diminishing => diminishing(&ctx)?,
        ExperimentKind::Drift => drift(&ctx)?,
        ExperimentKind::Lln => lln(&ctx)?,
        ExperimentKind::ArBounds => ar_bounds(&ctx)?,
        ExperimentKind::Harris => harris(&ctx)?,
        ExperimentKind::HarrisVerify => harris_verify(&ctx)?,
    };
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    for t in &art.tables {
        let csv_name = format!("{}.csv", t.name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(out_dir.join(&csv_name))?;
        w.write_record(&t.columns)?;
        for r in &t.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        files.push(csv_name.clone());
        let side = json!({
            "kind": cfg.kind.name(),
            "config_hash": hash,
            "table": t.name,
            "columns": t.columns,
            "rows": t.rows.len(),
        });
        let side_name = format!("{csv_name}.json");
        write_json(&out_dir.join(&side_name), &side)?;
        files.push(side_name);
    }
    let summary = Summary {
        kind: cfg.kind.name().to_string(),
        config_hash: hash.clone(),
        seed: cfg.seed,
        assertions: art.assertions,
        notes: art.notes,
        values: art.values,
    };
    write_json(&out_dir.join("summary.json"), &summary)?;
    files.push("summary.json".into());
    let checksums: Vec<Value> = files
        .iter()
        .map(|f| -> Result<Value, CliError> {
            let bytes = fs::read(out_dir.join(f))?;
            Ok(json!({"name": f, "sha256": hex::encode(Sha256::digest(&bytes))}))
        })
        .collect::<Result<_, _>>()?;
    let manifest = json!({
        "tool": "wamcmc",
        "version": env!("CARGO_PKG_VERSION"),
        "kind": cfg.kind.name(),
        "config_hash": hash,
        "seed": cfg.seed,
        "files": checksums,
        "wall_clock": {
            "started_unix": started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            "elapsed_seconds": clock.elapsed().as_secs_f64(),
        },
    });
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    files.push("manifest.json".into());
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        summary,
        files,
    })
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn simulate(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let kernel = ctx.kernel()?;
    let init = ctx.init()?;
    let horizon = ctx.horizon();
    let replicas = ctx.cfg.replicas.unwrap_or(1).max(1);
    let trajs = (0..replicas)
        .into_par_iter()
        .map(|r| run_adaptive(kernel, &ctx.policy, &init, horizon, &ctx.stream.split(r as u64)))
        .collect::<crate::Result<Vec<_>>>()?;
    let times: Vec<usize> = ctx.cfg.checkpoints.clone().unwrap_or_else(|| (0..=horizon).collect());
    let dim = kernel.embed(ctx.point()?.1)?.len();
    let mut table = Table {
        name: "simulate".into(),
        columns: coord_columns(&["replica", "t", "tuning"], dim, &[]),
        rows: Vec::new(),
    };
    let mut changes = Vec::with_capacity(replicas);
    let mut freeze_ok = true;
    for (r, traj) in trajs.iter().enumerate() {
        freeze_ok &= traj.verify_freeze(kernel, &ctx.policy).is_ok();
        changes.push(traj.records.windows(2).filter(|w| w[0].tuning != w[1].tuning).count());
        for &t in &times {
            let rec = &traj.records[t];
            let mut row = vec![r.to_string(), t.to_string(), rec.tuning.describe()];
            row.extend(kernel.embed(&rec.state)?.into_iter().map(num));
            table.rows.push(row);
        }
    }
    let mut art = Artifacts::new();
    art.value("horizon", horizon);
    art.value("replicas", replicas);
    art.value("tuning_changes", &changes);
    let rows = table.rows.len();
    art.tables.push(table);
    art.assert("freeze", freeze_ok, true, rows, "tuning constant wherever the policy is frozen");
    Ok(art)
}

/// Draws or enumerates the reference `π` for the kernel.
fn reference_measure(ctx: &Ctx, stream: &RngStream) -> Result<(EmpiricalMeasure, String), CliError> {
    let kernel = ctx.kernel()?;
    let n = ctx.cfg.params.reference_samples.unwrap_or(1000).max(1);
    Ok(match kernel {
        KernelFamily::DiscreteAr => {
            let pts: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect();
            (EmpiricalMeasure::uniform_1d(&pts)?, format!("stratified Unif(0,1), {n} points"))
        }
        KernelFamily::GaussianAr(g) => {
            let mut rng = stream.clone();
            let zero = DVector::zeros(g.dim());
            let pts = (0..n)
                .map(|_| Ok(gaussian_sample(&mut rng, &zero, g.cov_sqrt())?.iter().copied().collect()))
                .collect::<crate::Result<Vec<Vec<f64>>>>()?;
            (EmpiricalMeasure::uniform(pts)?, format!("exact N(0, C) draws, {n} samples"))
        }
        KernelFamily::DiscreteRwm(k) => {
            let law = k.target_law();
            let support = k.support();
            let pts = support.iter().map(|&i| k.grid().point(i)).collect();
            let w = support.iter().map(|&i| law[i]).collect();
            (EmpiricalMeasure::new(pts, w)?, "exact target law on the grid".to_string())
        }
        KernelFamily::Ula(_) | KernelFamily::Diffusion(_) => {
            let (g, x) = ctx.point()?;
            let alpha = ctx.cfg.params.pilot_alpha.unwrap_or(0.1);
            pilot_reference(kernel, g, x, alpha, n, stream)?
        }
    })
}

fn distance(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let kernel = ctx.kernel()?;
    let horizon = ctx.horizon();
    let replicas = ctx.cfg.replicas.unwrap_or(2);
    let times: Vec<usize> = ctx.cfg.checkpoints.clone().unwrap_or_else(|| (0..=horizon).collect());
    let sections = run_ensemble(kernel, &ctx.policy, &ctx.init()?, horizon, replicas, &times, &ctx.stream.split(0))?;
    let (reference, note) = reference_measure(ctx, &ctx.stream.split(1))?;
    let method = ctx.cfg.params.method.unwrap_or(DistanceMethod::Bounded);
    let metric = ctx.metric();
    let mut rng = ctx.stream.split(2);
    let mut table = Table::new("distance", &["t", "distance", "error", "method"]);
    for s in &sections {
        let r = match method {
            DistanceMethod::Bounded => bounded_distance(&s.measure, &reference, &metric, ctx.subsample(), &mut rng)?,
            DistanceMethod::W1 => {
                transport_distance(&s.measure, &reference, &CostSpec::EuclideanP(1), ctx.subsample(), &mut rng)?
            }
            DistanceMethod::Sliced => {
                sliced_w1(&s.measure, &reference, ctx.cfg.params.projections.unwrap_or(64), &mut rng)?
            }
        };
        table.rows.push(vec![s.t.to_string(), num(r.cost), num(r.error), r.method.tag().to_string()]);
    }
    let mut art = Artifacts::new();
    art.notes.push(format!("reference: {note}"));
    art.value("replicas", replicas);
    art.tables.push(table);
    Ok(art)
}

fn containment(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let kernel = ctx.kernel()?;
    let (g, x) = ctx.point()?;
    let p = &ctx.cfg.params;
    let eps = p.eps.unwrap_or(0.1);
    let n_max = p.n_max.unwrap_or(0);
    let est = match (kernel, g, x) {
        (KernelFamily::DiscreteAr, TuningParam::DiscreteBase(gamma), State::Real(x0)) => {
            let n = u32::try_from(n_max).map_err(|_| CliError::Runtime("n_max too large".into()))?;
            containment_discrete_ar_exact(*gamma, *x0, eps, n)?
        }
        _ => {
            let (reference, note) = reference_measure(ctx, &ctx.stream.split(1))?;
            let cc = ContainmentConfig {
                eps,
                n_max,
                replicas: ctx.cfg.replicas.unwrap_or(256),
                metric: ctx.metric(),
                subsample: ctx.subsample(),
            };
            estimate_containment(kernel, g, x, &cc, &reference, &note, &ctx.stream.split(0))?
        }
    };
    let mut table = Table::new("containment", &["n", "distance", "error"]);
    for (n, (d, e)) in est.distances.iter().zip(&est.errors).enumerate() {
        table.rows.push(vec![n.to_string(), num(*d), num(*e)]);
    }
    let mut art = Artifacts::new();
    art.value("eps", eps);
    art.value("horizon", est.horizon);
    art.value("censored", est.censored());
    art.notes.push(est.note());
    art.notes.push(format!("reference: {}", est.reference));
    let rows = table.rows.len();
    art.tables.push(table);
    art.assert("containment", !est.censored(), false, rows, est.note());
    Ok(art)
}

fn diminishing(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let kernel = ctx.kernel()?;
    let traj = run_adaptive(kernel, &ctx.policy, &ctx.init()?, ctx.horizon(), &ctx.stream.split(0))?;
    let p = &ctx.cfg.params;
    let mut dc = DiminishingConfig {
        pairs_per_delta: p.pairs_per_delta.unwrap_or(DEFAULT_PAIRS),
        draws_per_pair: p.draws_per_pair.unwrap_or(1),
        times: p.times.clone(),
        ..Default::default()
    };
    if let Some(d) = &p.deltas {
        dc.deltas = d.clone();
    }
    let est = estimate_diminishing(&traj, kernel, &dc, &ctx.stream.split(1))?;
    let mut table = Table::new("diminishing", &["t", "delta", "estimate", "residual"]);
    for ((t, row), res) in est.times.iter().zip(&est.values).zip(&est.residual) {
        for (d, v) in est.deltas.iter().zip(row) {
            table.rows.push(vec![t.to_string(), num(*d), num(*v), num(*res)]);
        }
    }
    let mut art = Artifacts::new();
    art.value("late_residual", est.late_residual);
    art.value("non_diminishing", est.non_diminishing);
    art.value("flag_tol", dc.flag_tol);
    if est.non_diminishing {
        art.notes.push(format!(
            "non-diminishing: late residual {} exceeds {}",
            est.late_residual, dc.flag_tol
        ));
    }
    let rows = table.rows.len();
    art.tables.push(table);
    art.assert(
        "diminishing",
        !est.non_diminishing,
        false,
        rows,
        format!("late residual {}", est.late_residual),
    );
    Ok(art)
}

fn drift(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let kernel = ctx.kernel()?;
    let p = &ctx.cfg.params;
    let tunings: Vec<TuningParam> = match &p.tunings {
        Some(ts) => ts.iter().map(|t| t.build()).collect::<crate::Result<_>>()?,
        None => vec![ctx.point()?.0.clone()],
    };
    for g in &tunings {
        kernel.validate_tuning(g)?;
    }
    let points: Vec<State> = p.test_points.iter().flatten().map(|s| s.build()).collect();
    let norm_sq = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let zero = |_: &[f64]| 0.0;
    let v: &(dyn Fn(&[f64]) -> f64 + Sync) = match p.drift_fn.unwrap_or(DriftFnSpec::NormSq) {
        DriftFnSpec::NormSq => &norm_sq,
        DriftFnSpec::Zero => &zero,
    };
    let given = match (p.drift_lambda, p.drift_l) {
        (Some(l), Some(c)) => Some((l, c)),
        _ => None,
    };
    let rep = check_drift(kernel, &tunings, v, &points, p.samples_per_point.unwrap_or(1000), given, &ctx.stream)?;
    let dim = rep.points.first().map_or(0, |q| q.coords.len());
    let mut table = Table {
        name: "drift".into(),
        columns: coord_columns(&["tuning"], dim, &["v", "pv", "pv_se", "residual"]),
        rows: Vec::new(),
    };
    for q in &rep.points {
        let mut row = vec![q.tuning.to_string()];
        row.extend(q.coords.iter().map(|c| num(*c)));
        row.extend([num(q.v), num(q.pv), num(q.pv_se), num(q.residual)]);
        table.rows.push(row);
    }
    let mut art = Artifacts::new();
    art.value("lambda_hat", rep.lambda_hat);
    art.value("l_hat", rep.l_hat);
    art.value("violations", rep.violations);
    let rows = table.rows.len();
    art.tables.push(table);
    if let Some((l, c)) = given {
        art.assert(
            "drift",
            rep.violations == 0,
            true,
            rows,
            format!("{} points exceed lambda={l}, L={c} by more than 3 SE", rep.violations),
        );
    }
    Ok(art)
}

fn lln(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let kernel = ctx.kernel()?;
    let p = &ctx.cfg.params;
    let phi = match p.phi.clone().unwrap_or(PhiSpec::FirstCoordinate) {
        PhiSpec::FirstCoordinate => TestFunction::first_coordinate(),
        PhiSpec::CappedNorm => TestFunction::capped_norm(),
        PhiSpec::Constant(c) => TestFunction::new(format!("const {c}"), 0.0, move |_| c),
    };
    let grid = p.t_grid.clone().unwrap_or_default();
    let rep = lln_curve(
        kernel,
        &ctx.policy,
        &ctx.init()?,
        &phi,
        p.reference_value.unwrap_or(0.0),
        &grid,
        ctx.cfg.replicas.unwrap_or(2),
        &ctx.stream,
    )?;
    let mut table = Table::new("lln", &["T", "mse", "mse_se"]);
    for ((t, m), se) in rep.t_grid.iter().zip(&rep.mse).zip(&rep.mse_se) {
        table.rows.push(vec![t.to_string(), num(*m), num(*se)]);
    }
    let mut art = Artifacts::new();
    art.value("phi", &rep.phi);
    art.value("lipschitz", rep.lipschitz);
    art.value("reference", rep.reference);
    art.value("slope", rep.slope);
    art.value("monotone", rep.monotone);
    let rows = table.rows.len();
    art.tables.push(table);
    let detail = match rep.slope {
        Some(s) => format!("log-log slope {s}"),
        None => "zero mean-square error".to_string(),
    };
    art.assert("lln", rep.monotone, false, rows, detail);
    Ok(art)
}

fn ar_bounds(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let p = &ctx.cfg.params;
    let example = match p.example.as_ref().expect("validated") {
        ArExampleSpec::Discrete { gamma, x } => ArExample::Discrete { gamma: *gamma, x: *x },
        ArExampleSpec::Gaussian { cov, gamma, x } => ArExample::Gaussian {
            cov: cov.build()?,
            gamma: *gamma,
            x: x.clone(),
        },
    };
    let t_min = p.t_min.unwrap_or(0);
    let t_max = p.t_max.unwrap_or(0);
    let rows = ar_bound_check(&example, t_min, t_max)?;
    let mut table = Table::new("ar-bounds", &["t", "exact_distance", "paper_bound", "satisfied"]);
    for r in &rows {
        table.rows.push(vec![r.t.to_string(), num(r.exact_distance), num(r.paper_bound), r.satisfied.to_string()]);
    }
    let ok = rows.iter().all(|r| r.satisfied);
    let bad = rows.iter().filter(|r| !r.satisfied).count();
    let mut art = Artifacts::new();
    art.value("t_min", t_min);
    art.value("t_max", t_max);
    art.tables.push(table);
    art.assert(
        "ar-bounds",
        ok,
        true,
        rows.len(),
        format!("{bad} rows exceed the geometric bound"),
    );
    Ok(art)
}

fn harris(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let p = &ctx.cfg.params;
    let c = harris_constants(
        p.lambda.unwrap_or_default(),
        p.k.unwrap_or_default(),
        p.kappa.unwrap_or_default(),
        p.alpha.unwrap_or_default(),
        p.delta.unwrap_or_default(),
    )?;
    let entries = [
        ("lambda", c.lambda),
        ("k", c.k),
        ("kappa", c.kappa),
        ("alpha", c.alpha),
        ("delta", c.delta),
        ("beta_star", c.beta_star),
        ("r", c.r),
        ("f1", c.f1),
        ("f2", c.f2),
        ("f3", c.f3),
        ("alpha_star", c.alpha_star),
    ];
    let mut table = Table::new("harris", &["name", "value"]);
    let mut art = Artifacts::new();
    for (name, v) in entries {
        table.rows.push(vec![name.to_string(), num(v)]);
        art.value(name, v);
    }
    art.tables.push(table);
    art.assert(
        "harris",
        c.is_consistent(),
        true,
        entries.len(),
        format!("alpha_star = {}", c.alpha_star),
    );
    Ok(art)
}

fn harris_verify(ctx: &Ctx) -> Result<Artifacts, CliError> {
    let p = &ctx.cfg.params;
    let wanted = p.chains.unwrap_or(1);
    let n = p.states.unwrap_or(2);
    let tunings = p.chain_tunings.unwrap_or(2);
    let lambda = p.lambda.unwrap_or(0.5);
    let delta = p.delta.unwrap_or(0.1);
    let t_max = p.t_max.unwrap_or(10);
    let mut rng = ctx.stream.split(0);
    let mut jobs = Vec::new();
    let mut skipped = 0usize;
    while jobs.len() < wanted {
        if skipped > 100 * wanted {
            return Err(CliError::Runtime(format!("{skipped} random chains admitted no constants")));
        }
        let chain = random_reversible_chain(n, tunings, &mut rng)?;
        let (k, kappa, alpha) = fit_harris_inputs(&chain, lambda, delta)?;
        match harris_constants(lambda, k, kappa, alpha, delta) {
            Ok(c) => jobs.push((chain, c)),
            Err(_) => skipped += 1,
        }
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(chain, c)| verify_harris_contraction(chain, c, t_max))
        .collect();
    let mut table = Table::new(
        "harris-verify",
        &["chain", "k", "kappa", "alpha", "alpha_star", "pairs_checked", "worst_ratio", "rows_checked", "worst_stationary_ratio", "passed"],
    );
    let mut failures = Vec::new();
    for (i, ((_, c), r)) in jobs.iter().zip(&results).enumerate() {
        let mut row = vec![i.to_string(), num(c.k), num(c.kappa), num(c.alpha), num(c.alpha_star)];
        match r {
            Ok(rep) => row.extend([
                rep.pairs_checked.to_string(),
                num(rep.worst_ratio),
                rep.rows_checked.to_string(),
                num(rep.worst_stationary_ratio),
                "true".into(),
            ]),
            Err(e) => {
                failures.push(format!("chain {i}: {e}"));
                row.extend(["".into(), "".into(), "".into(), "".into(), "false".into()]);
            }
        }
        table.rows.push(row);
    }
    let mut art = Artifacts::new();
    art.value("chains", wanted);
    art.value("states", n);
    art.value("skipped", skipped);
    art.notes.extend(failures.iter().cloned());
    art.tables.push(table);
    art.assert(
        "harris-verify",
        failures.is_empty(),
        true,
        wanted,
        format!("{} of {wanted} chains violate the contraction", failures.len()),
    );
    Ok(art)
}
