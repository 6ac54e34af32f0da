//! `colornoise`: correlation dynamics of two qubits under telegraph and colored noise.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or schema; exit code 2.
    Config(String),
    /// A numerical routine failed; exit code 3.
    Numerical(String),
    /// Validation ran but its checks did not pass; exit code 1.
    Failed(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Failed(m) => write!(f, "validation failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<colornoise::Error> for CliError {
    fn from(e: colornoise::Error) -> Self {
        match e {
            colornoise::Error::Config(_) | colornoise::Error::Domain { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "colornoise", version, about = "Two-qubit correlation dynamics under telegraph and colored noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the negativity and discord time series.
    Run(CommonArgs),
    /// Compare the closed-form series with Monte Carlo estimates.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// Evaluate the closed form with this multiplier instead of the topology's.
        #[arg(long, hide = true)]
        mismatch_m: Option<f64>,
    },
    /// Synthesized, collection and periodogram spectra with fitted slopes.
    Psd(CommonArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Flat TOML configuration file.
    pub config: Option<PathBuf>,
    /// Replay the configuration recorded in a manifest.
    #[arg(long, conflicts_with = "config")]
    pub manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_parser = ["single", "collection", "collection-random"])]
    pub scenario: Option<String>,
    #[arg(long, value_parser = ["separate", "common"])]
    pub topology: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma_min: Option<f64>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    /// Fluctuators per environment.
    #[arg(long)]
    pub nf: Option<i64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of grid points on [0, t_max].
    #[arg(long)]
    pub points: Option<i64>,
    /// Add Monte Carlo columns to `run`.
    #[arg(long)]
    pub mc: bool,
    #[arg(long)]
    pub trajectories: Option<i64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<i64>,
    /// Frequencies in the `psd` output.
    #[arg(long)]
    pub freq_points: Option<i64>,
    /// Skip the simulated periodogram in `psd`.
    #[arg(long)]
    pub no_periodogram: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Validate { common, mismatch_m } => commands::validate(&common, mismatch_m),
        Command::Psd(args) => commands::psd(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("colornoise: {e}");
            ExitCode::from(e.code())
        }
    }
}
