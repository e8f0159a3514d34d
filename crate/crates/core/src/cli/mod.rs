//! Config-driven experiment runner behind the `wamcmc` binary.

mod config;
mod report;
mod run;

use std::fmt;

pub use config::{
    parse_config, ArExampleSpec, DistanceMethod, DriftFnSpec, ExperimentConfig, ExperimentKind, InitSpec, KernelSpec,
    MatrixSpec, MetricSpec, Params, PhiSpec, PolicySpec, RuleSpec, ScheduleSpec, StateSpec, TargetSpec, Tolerances,
    TuningSpec, Violation,
};
pub use report::{emit_report, read_summary};
pub use run::{resolve_out_dir, run_experiment, Assertion, RunOutcome, Summary, OUT_DIR_ENV};

#[derive(Debug)]
pub enum CliError {
    /// Every violation found in the config.
    Schema(Vec<Violation>),
    UnknownField { path: String, name: String },
    Runtime(String),
    /// A checked bound failed.
    Assertion(String),
    MissingArtifact(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::UnknownField { .. } => 2,
            CliError::Runtime(_) | CliError::MissingArtifact(_) => 3,
            CliError::Assertion(_) => 4,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema",
            CliError::UnknownField { .. } => "unknown-field",
            CliError::Runtime(_) => "runtime",
            CliError::Assertion(_) => "assertion",
            CliError::MissingArtifact(_) => "missing-artifact",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: ", self.category())?;
        match self {
            CliError::Schema(v) => {
                let parts: Vec<String> = v
                    .iter()
                    .map(|x| {
                        let path = if x.path.is_empty() || x.path == "." { "<root>" } else { &x.path };
                        format!("{path}: {}", x.reason)
                    })
                    .collect();
                f.write_str(&parts.join("; "))
            }
            CliError::UnknownField { path, name } => write!(f, "unknown field `{name}` at {path}"),
            CliError::Runtime(m) | CliError::Assertion(m) | CliError::MissingArtifact(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(format!("json: {e}"))
    }
}
