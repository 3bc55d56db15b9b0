use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod table;

/// Gaussian-state simulator for SU(1,1) and related interferometers.
#[derive(Debug, Parser)]
#[command(name = "su11", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "SU11_NUM_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// SNR of one scenario against its closed form.
    Run(Common),
    /// One row per point of the config's sweep block.
    Sweep(Common),
    /// Output intensities and variances over a full fringe.
    Fringe(Common),
    /// Joint spectral intensity, marginals and Schmidt number.
    Jsf(Common),
    /// Runs the bundled configs (or `--config`) and compares with the oracles.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (directory for `jsf`). Defaults to the config's `output`,
    /// then stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Relative SNR tolerance for the oracle check.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exit with status 3 if any row misses its oracle.
    #[arg(long)]
    pub selfcheck: bool,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Mismatch(String),
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Invalid(_) => 2,
            Self::Mismatch(_) => 3,
            Self::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Invalid(m) => write!(f, "invalid input: {m}"),
            Self::Mismatch(m) => write!(f, "oracle mismatch: {m}"),
            Self::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<su11_core::Error> for CliError {
    fn from(e: su11_core::Error) -> Self {
        match e {
            su11_core::Error::InvalidArgument(m) => Self::Invalid(m),
            other => Self::Failed(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Failed(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Failed(format!("csv error: {e}"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("su11: cannot start {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Run(a) => commands::run(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Fringe(a) => commands::fringe(a),
        Command::Jsf(a) => commands::jsf(a),
        Command::Selfcheck(a) => commands::selfcheck(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("su11: {e}");
            ExitCode::from(e.code())
        }
    }
}
