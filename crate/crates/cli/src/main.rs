//! `sigexec`: simulate, sweep and validate static versus signal-adaptive
//! execution strategies, and emit the data behind the reference figures.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sigexec_core::validation::{Faults, Level};

use commands::{CliError, Common, EXIT_CONFIG};
use config::Config;

/// Caps the Monte Carlo worker pool.
const THREADS_ENV: &str = "EXEC_SIGNAL_THREADS";

#[derive(Parser)]
#[command(name = "sigexec", version, about = "Static vs signal-adaptive optimal execution")]
struct Cli {
    /// Scenario file (TOML); defaults to the reference parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides `simulation.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Time step; overrides `simulation.steps` and `simulation.dt`.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Monte Carlo path count.
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    Kernel,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path and write `t, I, P, X, C, rate` as CSV.
    Simulate {
        /// adaptive | fuel | static | twap | update-N
        #[arg(long)]
        strategy: Option<String>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the CSV bundle behind figure N (1-5).
    Figure {
        n: u8,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Paired Monte Carlo comparison across values of T, sigma or n.
    Sweep {
        /// T | sigma | n
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Two strategies `a,b`; the gap is a - b.
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle-certification suite.
    Validate {
        #[arg(long, value_enum, default_value = "fast")]
        level: LevelArg,
        /// Inject a known defect to confirm the suite catches it.
        #[arg(long, value_enum, hide = true)]
        fault: Option<FaultArg>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError {
        code: EXIT_CONFIG,
        message: format!("invalid parameter `{THREADS_ENV}`: expected a positive integer, got `{raw}`"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError { code: EXIT_CONFIG, message: format!("thread pool: {e}") })
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    if let Command::Validate { level, fault } = cli.command {
        let level = match level {
            LevelArg::Fast => Level::Fast,
            LevelArg::Full => Level::Full,
        };
        let faults = Faults { misnormalized_kernel: matches!(fault, Some(FaultArg::Kernel)) };
        return commands::validate(level, faults);
    }
    let config = Config::load(cli.config.as_deref())?;
    let common = Common {
        config: &config,
        seed: cli.seed.or(config.simulation.seed).unwrap_or(0),
        dt: cli.dt,
        paths: cli.paths,
    };
    match cli.command {
        Command::Simulate { strategy, out } => commands::simulate(&common, strategy.as_deref(), out.as_deref()),
        Command::Figure { n, out } => commands::figure(&common, n, &out),
        Command::Sweep { param, values, strategy, out } => {
            commands::run_sweep(&common, &param, &values, strategy.as_deref(), out.as_deref())
        }
        Command::Validate { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
