//! `lossqfi`: Fisher information, optimal states and strategy comparisons for
//! lossy two-arm interferometers.
//!
//! Exit codes: 0 on success, 2 for invalid configuration, 3 for numeric failure.

mod commands;
mod config;
mod format;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{jobs_from_env, CommandName, JobArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<lossqfi::Error> for CliError {
    fn from(e: lossqfi::Error) -> Self {
        match e {
            lossqfi::Error::Contract(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lossqfi", version, about)]
struct Cli {
    /// JSON job file with the same fields as the flags; flags win on conflict.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; falls back to QFI_JOBS, then to the available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fisher information of one input state.
    Compute(JobArgs),
    /// Input state maximizing the Fisher information bound.
    Optimize(JobArgs),
    /// Precision of several strategies along the n or eta axis.
    Sweep(JobArgs),
    /// Differential scaling exponent of one strategy.
    Scaling(JobArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, flags) = match cli.command {
        Some(Command::Compute(a)) => (Some(CommandName::Compute), a),
        Some(Command::Optimize(a)) => (Some(CommandName::Optimize), a),
        Some(Command::Sweep(a)) => (Some(CommandName::Sweep), a),
        Some(Command::Scaling(a)) => (Some(CommandName::Scaling), a),
        None => (None, JobArgs::default()),
    };
    let args = match &cli.config {
        Some(path) => flags.merge(JobArgs::load(path)?),
        None => flags,
    };
    let name = name.or(args.command).ok_or_else(|| {
        CliError::Config("no command given (compute, optimize, sweep or scaling)".into())
    })?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs.or(args.jobs).or(jobs_from_env()?) {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;

    let text = pool.install(|| match name {
        CommandName::Compute => commands::compute(&args),
        CommandName::Optimize => commands::optimize_cmd(&args),
        CommandName::Sweep => commands::sweep(&args),
        CommandName::Scaling => commands::scaling(&args),
    })?;

    match &args.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write output: {e}"))),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
