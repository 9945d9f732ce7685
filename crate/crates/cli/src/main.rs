//! `cvqkd`: operating points, transmittance sweeps and Monte Carlo checks
//! for a rate-matched CV-QKD link.
//!
//! Exit codes: 0 success, 1 configuration error, 2 infeasible operating
//! point, 3 output I/O error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cvqkd", version, about = "Rate-matched CV-QKD link calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the nominal operating point and its information budget.
    OperatingPoint {
        #[arg(short, long)]
        config: PathBuf,
        /// Override the configured headroom factor.
        #[arg(long)]
        headroom: Option<f64>,
        /// Write a JSON record of the operating point here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sweep the channel transmittance and write a CSV table.
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        headroom: Option<f64>,
        /// Strategy to include (repeatable). Defaults to the configured list.
        #[arg(short, long = "strategy")]
        strategies: Vec<String>,
        /// CSV destination. Defaults to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo check of the analytic SNR and mutual information.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        headroom: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_symbols: Option<u64>,
        /// Write a JSON record of the run here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List code presets and the configured code.
    Codes {
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::OperatingPoint { config, headroom, output } => {
            commands::operating_point(&config, headroom, output.as_deref())
        }
        Command::Sweep { config, headroom, strategies, output } => {
            commands::sweep(&config, headroom, &strategies, output.as_deref())
        }
        Command::Simulate { config, headroom, seed, n_symbols, output } => {
            commands::simulate(&config, headroom, seed, n_symbols, output.as_deref())
        }
        Command::Codes { config } => commands::codes(config.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("cvqkd: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
