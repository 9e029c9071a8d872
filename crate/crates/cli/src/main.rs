//! Configuration-driven experiment runner for the GRBM toolkit.
//!
//! Exit codes: 0 success, 1 domain failure (failed validation, rejected
//! certificate, unstable inputs), 2 usage or config error, 3 numeric
//! blow-up during simulation.

mod commands;
mod config;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ExperimentKind;

#[derive(Parser)]
#[command(name = "grbm", version, about = "GRBM simulation and certification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the model hypotheses and emit a validation report.
    Validate(RunArgs),
    /// Integrate one path or an ensemble and export CSV.
    Simulate(RunArgs),
    /// Search for an empirical exponential drift certificate.
    DriftCheck(RunArgs),
    /// Compare terminal samples against the analytic stationary law.
    StationaryCheck(RunArgs),
    /// Estimate the total-variation decay exponent.
    Mixing(RunArgs),
    /// Tabulate hard/soft certificate rates across dimensions.
    RateScaling(RunArgs),
    /// Compare soft-reflection gap laws against the hard reference.
    PenaltyLimit(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (strict JSON schema).
    #[arg(long)]
    config: PathBuf,
    /// Overrides run.seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results are identical for any value.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides output_dir from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dotted-path config overrides, e.g. --set run.dt=1e-3.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Validate(a) => (ExperimentKind::Validate, a),
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::DriftCheck(a) => (ExperimentKind::DriftCheck, a),
        Command::StationaryCheck(a) => (ExperimentKind::StationaryCheck, a),
        Command::Mixing(a) => (ExperimentKind::Mixing, a),
        Command::RateScaling(a) => (ExperimentKind::RateScaling, a),
        Command::PenaltyLimit(a) => (ExperimentKind::PenaltyLimit, a),
    };
    match run(kind, args) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(classify(&err))
        }
    }
}

fn run(kind: ExperimentKind, args: &RunArgs) -> grbm::Result<u8> {
    let loaded = config::load(
        &args.config,
        &args.set,
        args.seed,
        args.out.clone(),
    )?;
    if loaded.cfg.kind != kind {
        return Err(grbm::Error::Config(format!(
            "config kind {:?} does not match the {} subcommand",
            loaded.cfg.kind.as_str(),
            kind.as_str()
        )));
    }
    let ctx = commands::Ctx { loaded: &loaded };
    let dispatch = || match kind {
        ExperimentKind::Validate => commands::validate::run(&ctx),
        ExperimentKind::Simulate => commands::simulate::run(&ctx),
        ExperimentKind::DriftCheck => commands::drift::run(&ctx),
        ExperimentKind::StationaryCheck => commands::stationary::run(&ctx),
        ExperimentKind::Mixing => commands::mixing::run(&ctx),
        ExperimentKind::RateScaling => commands::rates::run(&ctx),
        ExperimentKind::PenaltyLimit => commands::penalty::run(&ctx),
    };
    match args.workers {
        None => dispatch(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| grbm::Error::Config(format!("worker pool: {e}")))?;
            pool.install(dispatch)
        }
    }
}

fn classify(err: &grbm::Error) -> u8 {
    match err {
        grbm::Error::Config(_) | grbm::Error::Input(_) => 2,
        grbm::Error::BlowUp { .. } => 3,
        _ => 1,
    }
}
