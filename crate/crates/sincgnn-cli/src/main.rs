//! `sincgnn` command-line harness.
//!
//! Exit codes: 0 on success, 1 on an internal failure or a failing
//! verification suite, 2 on an invalid configuration or unusable input.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::QuadArg;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl From<sincgnn::Error> for CliError {
    fn from(e: sincgnn::Error) -> Self {
        use sincgnn::Error::*;
        let code = match e {
            OracleFailure { .. } => 1,
            BandTooWide { .. } | OrderTooHigh { .. } | OffGrid { .. } | DomainError { .. } | Config(_) => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sincgnn", version, about = "Sample-built grid networks for bandlimited signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    /// Band limit σ of the random signals; defaults to π/2.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Comma-separated even values of M.
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<u32>>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random signals.
    #[arg(long)]
    pub signals: Option<usize>,
    /// Terms per random signal.
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long, value_enum)]
    pub quad_mode: Option<QuadArg>,
    /// JSON file with any of dim, sigma, m_list, beta, seed, n_signals, n_terms, quad_mode, out.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sup-errors of every approximant against M, one row per signal and M.
    Decay {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Leave the wall_time column empty so output is reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Build a network from a signal file and write it as JSON.
    Construct {
        #[arg(long)]
        signal_file: PathBuf,
        #[arg(long)]
        m: Option<u32>,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Evaluate a serialized network on a grid.
    Eval {
        #[arg(long)]
        spec: PathBuf,
        /// `prediction` or `custom:STEP:LO:HI` (the cube [LO, HI]^d).
        #[arg(long, default_value = "prediction")]
        grid: String,
        /// Adds the exact signal and the error f − value per row.
        #[arg(long)]
        signal_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and write its JSON report.
    Verify {
        /// appendix, quadrature, mult or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Decay { exp, no_timing } => commands::decay(&exp, no_timing),
        Command::Construct { signal_file, m, exp } => commands::construct(&signal_file, m, &exp),
        Command::Eval { spec, grid, signal_file, out } => {
            commands::eval(&spec, &grid, signal_file.as_deref(), out.as_deref())
        }
        Command::Verify { suite, out } => commands::verify(&suite, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
