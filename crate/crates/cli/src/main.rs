mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("no zero-Hopf equilibrium found")]
    NoDetection,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("verification mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::NoDetection => 3,
            Self::Precondition(_) => 4,
            Self::Mismatch(_) => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hopfforge", version, about = "Zero-Hopf limit cycle analysis of the Chua system")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Quadrature grid size (power of two)
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Comma-separated ε values, strictly decreasing
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    eps: Option<Vec<f64>>,
    /// Print the JSON report on stdout
    #[arg(long, global = true)]
    json: bool,
    /// Only errors on stderr, nothing on stdout
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locate a zero-Hopf equilibrium for parameters a a1 a2 b b1 b2
    Detect {
        #[arg(num_args = 6, required = true, allow_negative_numbers = true, value_names = ["A", "A1", "A2", "B", "B1", "B2"])]
        params: Vec<f64>,
    },
    /// Predict limit cycles from the averaged field of the configured family
    Predict,
    /// Predict, then confirm each cycle by shooting on the full system
    Verify,
    /// Count predicted cycles over a grid of p-family coefficients
    Scan,
}

fn init(cli: &Cli) -> Result<(), CliError> {
    let level = if cli.quiet { "error" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if let Ok(v) = std::env::var("HOPFFORGE_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Input(format!("HOPFFORGE_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init(&cli).and_then(|_| match &cli.command {
        Command::Detect { params } => commands::detect(&cli, params),
        Command::Predict => commands::predict(&cli),
        Command::Verify => commands::verify(&cli),
        Command::Scan => commands::scan(&cli),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hopfforge: {e}");
            ExitCode::from(e.code())
        }
    }
}
