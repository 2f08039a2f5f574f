//! `kfv` — command-line front end for the finite-volume Euler solvers and
//! the averaged-convergence analysis.
//!
//! Subcommands: `run` (simulate a multi-level experiment from a config
//! file), `analyze` (recompute convergence metrics from stored snapshots),
//! `table` (merge convergence CSVs), `riemann` (sample an exact 1D
//! Riemann solution).
//!
//! Exit codes: 0 success, 1 runtime/solver failure, 2 usage/config error.

mod analyze;
mod riemann;
mod table;

use clap::{Parser, Subcommand};
use kfv_core::bench::{run_experiment, ExperimentConfig};
use kfv_core::{Error, Real};
use std::fmt::Display;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "kfv",
    version,
    about = "Finite-volume Euler solvers with averaged-convergence analysis",
    after_help = "Exit codes: 0 success, 1 runtime/solver failure, 2 usage/config error."
)]
struct Cli {
    /// Worker threads for parallel analysis kernels (0 = automatic).
    #[arg(long, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-level experiment described by a config file.
    Run {
        /// Line-oriented `key = value` config (# starts a comment).
        config: PathBuf,
        /// Config overrides as `--key=value`; the command line wins.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Recompute convergence metrics from stored snapshots; CSV on stdout.
    Analyze {
        /// Directory holding level_* subdirectories of EULF1 snapshots.
        dir: PathBuf,
        /// Reference grid size n (default: the finest level present).
        #[arg(long)]
        reference: Option<usize>,
        /// Exponent q of the optimal-transport column.
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Analysis variable: density, momentum_x, momentum_y,
        /// total_entropy, or total_energy.
        #[arg(long, default_value = "density")]
        variable: String,
        /// Snapshot time to analyze (default: the latest time common to
        /// all levels; must match the stored time exactly).
        #[arg(long, allow_hyphen_values = true)]
        time: Option<f64>,
        /// Per-component scaling of the transport ground metric as five
        /// comma-separated factors for (rho, m1, m2, S, E).
        #[arg(long)]
        scaling: Option<String>,
        /// Drop the total-energy coordinate from the transport ground
        /// metric (compare the (rho, m1, m2, S) marginal).
        #[arg(long)]
        marginal: bool,
    },
    /// Merge convergence CSVs into one table with a leading source column.
    Table {
        /// Input convergence CSVs (as written by run or analyze).
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Write here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample the exact solution of a 1D Riemann problem; CSV on stdout.
    Riemann {
        /// Left state as rho,u,p.
        #[arg(long)]
        left: String,
        /// Right state as rho,u,p.
        #[arg(long)]
        right: String,
        /// Ratio of specific heats.
        #[arg(long, default_value_t = 1.4)]
        gamma: f64,
        /// Number of equally spaced samples in xi = x/t.
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Lower end of the sampled xi range.
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        xi_min: f64,
        /// Upper end of the sampled xi range.
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        xi_max: f64,
    },
}

/// CLI failure, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Wrong invocation, unreadable config, or invalid parameters → exit 2.
    Usage(String),
    /// A solver or analysis failure on a valid invocation → exit 1.
    Runtime(String),
}

pub fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn runtime(e: impl Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(usage)?;
    }
    match cli.command {
        Command::Run { config, overrides } => run_cmd(&config, &overrides),
        Command::Analyze {
            dir,
            reference,
            q,
            variable,
            time,
            scaling,
            marginal,
        } => analyze::analyze_cmd(&dir, reference, q, &variable, time, scaling.as_deref(), marginal),
        Command::Table { inputs, output } => table::table_cmd(&inputs, output.as_deref()),
        Command::Riemann {
            left,
            right,
            gamma,
            samples,
            xi_min,
            xi_max,
        } => riemann::riemann_cmd(&left, &right, gamma, samples, xi_min, xi_max),
    }
}

fn run_cmd(config_path: &Path, overrides: &[String]) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        CliError::Usage(format!("cannot read config {}: {e}", config_path.display()))
    })?;
    let mut config: ExperimentConfig<Real> = ExperimentConfig::parse(&text).map_err(usage)?;
    for item in overrides {
        let (key, value) = split_override(item)?;
        config.set_key(key, value).map_err(usage)?;
    }

    let result = run_experiment(&config).map_err(|e| match e {
        Error::Param(_) => usage(e),
        other => runtime(other),
    })?;
    for path in &result.table_paths {
        println!("wrote {}", path.display());
    }

    if let Some(first) = result.failures.first() {
        let rest: Vec<String> = result.failures[1..]
            .iter()
            .map(|f| f.n.to_string())
            .collect();
        let also = if rest.is_empty() {
            String::new()
        } else {
            format!(" (also failed: n = {})", rest.join(", "))
        };
        return Err(CliError::Runtime(format!(
            "level {} failed: {}{also}",
            first.n, first.message
        )));
    }
    println!(
        "completed {} levels of {} under {} to t = {}",
        result.stack.len(),
        config.benchmark.name(),
        config.scheme.name(),
        config.resolved_t_end()
    );
    Ok(())
}

/// Splits `--key=value` into its parts.
fn split_override(item: &str) -> Result<(&str, &str), CliError> {
    let bad = || CliError::Usage(format!("override must look like --key=value, got `{item}`"));
    let body = item.strip_prefix("--").ok_or_else(bad)?;
    let (key, value) = body.split_once('=').ok_or_else(bad)?;
    if key.is_empty() {
        return Err(bad());
    }
    Ok((key.trim(), value.trim()))
}
