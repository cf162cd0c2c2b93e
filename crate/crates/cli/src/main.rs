//! Configuration-driven experiment runner.
//!
//! Exit codes: 0 success, 1 io, 2 config schema violation, 3 numerical
//! divergence, 4 oracle mismatch in check mode.

// `!(x > y)` guards reject NaN along with the ordered failure
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, ExperimentKind};
use run::CliFailure;

#[derive(Parser)]
#[command(
    name = "qgeo",
    version,
    about = "Random curved-background simulations: ensembles, deviation dynamics, phase-sum kernels, wave evolution, and oracle checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split an inner product into Riemannian and symplectic parts.
    Decompose(RunArgs),
    /// Sample a random background-field ensemble.
    Ensemble(RunArgs),
    /// Integrate the interval dynamics in one field.
    Deviation(RunArgs),
    /// Sweep ensemble kernels over J and time spans.
    Kernel(RunArgs),
    /// Evaluate the density laws and their property suite.
    Stats(RunArgs),
    /// Evolve a wavefunction on a grid.
    Evolve(RunArgs),
    /// Run oracle comparisons and report pass/fail per criterion.
    Check(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Size of the worker thread pool (results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Self::Decompose(_) => ExperimentKind::Decompose,
            Self::Ensemble(_) => ExperimentKind::Ensemble,
            Self::Deviation(_) => ExperimentKind::Deviation,
            Self::Kernel(_) => ExperimentKind::Kernel,
            Self::Stats(_) => ExperimentKind::Stats,
            Self::Evolve(_) => ExperimentKind::Evolve,
            Self::Check(_) => ExperimentKind::Check,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Self::Decompose(a)
            | Self::Ensemble(a)
            | Self::Deviation(a)
            | Self::Kernel(a)
            | Self::Stats(a)
            | Self::Evolve(a)
            | Self::Check(a) => a,
        }
    }
}

fn execute(command: &Command) -> Result<i32, CliFailure> {
    let args = command.args();
    if let Some(threads) = args.threads {
        // ignore the error when a pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliFailure::schema(format!("config {}: {e}", args.config.display())))?;
    let mut config =
        ExperimentConfig::from_json(&text).map_err(|e| CliFailure::schema(e.to_string()))?;

    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_path = out.display().to_string();
    }
    if config.experiment != command.kind() {
        return Err(CliFailure::schema(format!(
            "config experiment '{}' does not match subcommand '{}'",
            config.experiment.name(),
            command.kind().name()
        )));
    }
    run::run(&config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code as u8)
        }
    }
}
