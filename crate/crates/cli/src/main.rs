//! mixbo: experiment harness for the mixed-variable Bayesian optimizer.
//!
//! Subcommands:
//! - `run`: execute a configured benchmark experiment (optimizer vs random
//!   baseline over a seed sweep), writing record files and a summary table.
//! - `session`: drive an external objective through persistent ask/tell
//!   steps; optimizer state survives process restarts.
//! - `diag`: theory-validation reports (information-gain bound, categorical
//!   Gram spectrum, regret curves).

mod config;
mod diag;
mod experiment;
mod session;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

/// Failures surfaced by subcommands, mapped onto process exit codes:
/// 0 success, 1 configuration error, 2 runtime error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "mixbo", version, about = "Bayesian optimization over mixed categorical/ordinal/continuous spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark experiment from a TOML config file.
    Run {
        /// Path to the experiment configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Persistent ask/tell session for external objectives.
    Session {
        #[command(subcommand)]
        command: SessionCommand,
    },
    /// Theory-validation reports as structured text.
    Diag {
        #[command(subcommand)]
        command: DiagCommand,
    },
}

#[derive(Subcommand)]
enum SessionCommand {
    /// Create a session directory from a config file.
    Init {
        /// Path to the experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Session directory to create state in.
        #[arg(long)]
        dir: PathBuf,
    },
    /// Propose the next batch of points and persist them as pending.
    Ask {
        /// Session directory.
        #[arg(long)]
        dir: PathBuf,
    },
    /// Report objective values for the pending batch, in proposal order.
    Tell {
        /// Session directory.
        #[arg(long)]
        dir: PathBuf,
        /// One objective value per pending point.
        #[arg(required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
    },
    /// Print the run record accumulated so far.
    Record {
        /// Session directory.
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum DiagCommand {
    /// Information-gain bound check for a single categorical variable.
    Gain {
        /// Number of categories (≥ 2).
        #[arg(long)]
        n: usize,
        /// Sample-set size (≥ 1).
        #[arg(long)]
        t: usize,
        /// Kernel lengthscale.
        #[arg(long, default_value_t = 1.0)]
        lengthscale: f64,
        /// Observation noise variance.
        #[arg(long, default_value_t = 0.1)]
        sigma2: f64,
        /// RNG seed for the random sample set.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Eigenstructure check of the full categorical Gram matrix.
    Spectrum {
        /// Number of categories (≥ 2).
        #[arg(long)]
        n: usize,
        /// Kernel lengthscale.
        #[arg(long, default_value_t = 1.0)]
        lengthscale: f64,
    },
    /// Regret curves of a stored run record against a known optimum.
    Regret {
        /// Path to a record file.
        #[arg(long)]
        record: PathBuf,
        /// Optimum value on the natural scale of the recorded problem.
        #[arg(long, allow_negative_numbers = true)]
        f_star: f64,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => experiment::run_experiment(&config),
        Command::Session { command } => match command {
            SessionCommand::Init { config, dir } => session::init(&config, &dir),
            SessionCommand::Ask { dir } => session::ask(&dir),
            SessionCommand::Tell { dir, values } => session::tell(&dir, &values),
            SessionCommand::Record { dir } => session::record(&dir),
        },
        Command::Diag { command } => match command {
            DiagCommand::Gain { n, t, lengthscale, sigma2, seed } => {
                diag::gain(n, t, lengthscale, sigma2, seed)
            }
            DiagCommand::Spectrum { n, lengthscale } => diag::spectrum(n, lengthscale),
            DiagCommand::Regret { record, f_star } => diag::regret(&record, f_star),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests exit 0; malformed usage is a
            // configuration error (exit 1).
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
