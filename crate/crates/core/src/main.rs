use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wamcmc::cli::{emit_report, parse_config, resolve_out_dir, run_experiment, CliError, Violation};

#[derive(Parser)]
#[command(name = "wamcmc", version, about = "Adaptive MCMC experiments with Wasserstein diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (the AMCMC_OUT_DIR environment variable takes precedence).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    Simulate(RunArgs),
    Distance(RunArgs),
    Containment(RunArgs),
    Diminishing(RunArgs),
    Drift(RunArgs),
    Lln(RunArgs),
    ArBounds(RunArgs),
    Harris(RunArgs),
    HarrisVerify(RunArgs),
    /// Summarizes an existing output directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(kind: &str, args: &RunArgs) -> Result<String, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", args.config.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Schema(vec![Violation { path: String::new(), reason: e.to_string() }]))?;
    if let (Some(seed), Some(obj)) = (args.seed, value.as_object_mut()) {
        obj.insert("seed".into(), seed.into());
    }
    let cfg = parse_config(&value.to_string())?;
    if cfg.kind.name() != kind {
        return Err(CliError::Schema(vec![Violation {
            path: "kind".into(),
            reason: format!("config is for {} but the subcommand is {kind}", cfg.kind.name()),
        }]));
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let out = resolve_out_dir(args.out.as_deref(), &cfg);
    let outcome = run_experiment(&cfg, &out)?;
    let report = emit_report(&outcome.out_dir)?;
    outcome.check().map(|_| report.clone()).map_err(|e| {
        println!("{report}");
        e
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Report { out } => {
            return match emit_report(out) {
                Ok(r) => {
                    println!("{r}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            };
        }
        Command::Simulate(a) => ("simulate", a),
        Command::Distance(a) => ("distance", a),
        Command::Containment(a) => ("containment", a),
        Command::Diminishing(a) => ("diminishing", a),
        Command::Drift(a) => ("drift", a),
        Command::Lln(a) => ("lln", a),
        Command::ArBounds(a) => ("ar-bounds", a),
        Command::Harris(a) => ("harris", a),
        Command::HarrisVerify(a) => ("harris-verify", a),
    };
    let level = if args.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(kind, args) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
