//! `urnlab`: exact laws, simulation and limit-theorem diagnostics for
//! infinite-color Pólya urns.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use urnlab_core::UrnError;

use config::{CommonArgs, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "urnlab", version, about = "Infinite-color Pólya urns on lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dp,
    Cf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MartingaleMode {
    Trace,
    SecondMoment,
    L2Scan,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact law of the drawn color Z_n
    ExactLaw {
        #[arg(long, value_enum, default_value = "dp")]
        method: Method,
        /// FFT grid for --method cf (0 = automatic)
        #[arg(long, default_value_t = 0)]
        grid: usize,
    },
    /// One simulated path of drawn colors
    Simulate,
    /// Distance of the standardized law to the Gaussian along --n-list
    Clt {
        /// Replication experiment on the random configuration instead
        #[arg(long)]
        random_config: bool,
    },
    /// Local-limit sup statistic along --n-list
    Llt,
    /// Martingale trace, exact second moments or the L2 region scan
    Martingale {
        #[arg(long, value_enum, default_value = "trace")]
        mode: MartingaleMode,
        /// Half-width scanned by --mode l2-scan
        #[arg(long, default_value_t = 2.0)]
        delta_max: f64,
        #[arg(long, default_value_t = 800)]
        scan_grid: usize,
    },
    /// Span / minimal lattice of the increments and thinned increments
    LatticeInfo,
    /// Compare the convolution law with brute-force enumeration
    OracleCheck,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Core(UrnError),
    Io(std::io::Error),
    /// Oracle mismatch and similar failed checks.
    CheckFailed(String),
}

impl From<UrnError> for CliError {
    fn from(e: UrnError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical_guard() => 3,
            CliError::CheckFailed(_) => 3,
            _ => 2,
        }
    }

    fn guard(&self) -> String {
        match self {
            CliError::Validation(_) => "Validation".into(),
            CliError::Io(_) => "Io".into(),
            CliError::CheckFailed(_) => "CheckFailed".into(),
            CliError::Core(e) => {
                let dbg = format!("{e:?}");
                dbg.split(['(', ' ', '{']).next().unwrap_or_default().to_string()
            }
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Validation(m) | CliError::CheckFailed(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
            CliError::Io(e) => e.to_string(),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("URNLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Validation(format!("URNLAB_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = RunConfig::resolve(&cli.common)?;
    match cli.command {
        Command::ExactLaw { method, grid } => commands::exact_law(&cfg, method, grid),
        Command::Simulate => commands::simulate(&cfg),
        Command::Clt { random_config: false } => commands::clt(&cfg),
        Command::Clt { random_config: true } => commands::random_config(&cfg),
        Command::Llt => commands::llt(&cfg),
        Command::Martingale { mode, delta_max, scan_grid } => commands::martingale(&cfg, mode, delta_max, scan_grid),
        Command::LatticeInfo => commands::lattice_info(&cfg),
        Command::OracleCheck => commands::oracle_check(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let summary = serde_json::json!({
                "status": "error",
                "guard": e.guard(),
                "message": e.message(),
            });
            eprintln!("{summary}");
            ExitCode::from(e.exit_code())
        }
    }
}
