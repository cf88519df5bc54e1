//! `oucap` experiment driver: configuration in, JSON/CSV records out.
//!
//! Exit codes: 0 success, 2 validation error, 3 solver non-convergence,
//! 4 invariant violation in `selftest`. Records are written atomically with
//! 17-significant-digit floats; run metadata (timestamps) lives in a
//! separate `meta` field so result bytes compare across runs.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "oucap", version, about = "Gaussian potential theory experiments")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed override (wins over the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for result records.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Suppress the one-line summaries.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One capacity value (one region, one definition).
    Capacity,
    /// Capacity-equivalence sweep over a region family.
    Equivalence,
    /// Sobolev bound of truncated potentials across dimensions.
    TruncationBound,
    /// Pointwise multiplicative-estimate sweep.
    Multest,
    /// Gaussian Hausdorff measure of a set.
    Hausdorff,
    /// Sheet hitting probability of a set.
    Hitting,
    /// Hitting-vs-capacity correspondence table.
    Kakutani,
    /// L^p-uniqueness verdict for a removed set.
    Uniqueness,
    /// Full invariant suite.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Capacity => "capacity",
            Command::Equivalence => "equivalence",
            Command::TruncationBound => "truncation-bound",
            Command::Multest => "multest",
            Command::Hausdorff => "hausdorff",
            Command::Hitting => "hitting",
            Command::Kakutani => "kakutani",
            Command::Uniqueness => "uniqueness",
            Command::Selftest => "selftest",
        }
    }
}

/// Failure modes mapped onto the documented exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("solver did not converge: {0}")]
    Solver(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<oucap::Error> for CliError {
    fn from(err: oucap::Error) -> Self {
        match err {
            oucap::Error::SolverDidNotConverge { .. } => CliError::Solver(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<ExperimentConfig, CliError> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read {path:?}: {e}")))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Validation(format!("config parse error: {e}")))
        }
    }
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("OUCAP_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();

    let run = || -> Result<(), CliError> {
        let mut cfg = load_config(cli.config.as_ref())?;
        if let Some(seed) = cli.seed {
            cfg.seed = Some(seed);
        }
        std::fs::create_dir_all(&cli.out)?;
        let ctx = commands::RunContext {
            out_dir: cli.out.clone(),
            quiet: cli.quiet,
            command: cli.command.name(),
        };
        match cli.command {
            Command::Capacity => commands::capacity(cfg, &ctx),
            Command::Equivalence => commands::equivalence(cfg, &ctx),
            Command::TruncationBound => commands::truncation_bound(cfg, &ctx),
            Command::Multest => commands::multest(cfg, &ctx),
            Command::Hausdorff => commands::hausdorff(cfg, &ctx),
            Command::Hitting => commands::hitting(cfg, &ctx),
            Command::Kakutani => commands::kakutani(cfg, &ctx),
            Command::Uniqueness => commands::uniqueness(cfg, &ctx),
            Command::Selftest => commands::selftest(cfg, &ctx),
        }
    };

    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("oucap: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
