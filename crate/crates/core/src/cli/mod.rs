//! The `zoaudit` command line.
//!
//! Exit codes: 0 when the run completes (verdicts live in the reports),
//! 1 for configuration or usage errors, 2 for runtime failures.

pub mod config;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{parse_config, parse_config_str, ExperimentConfig, Mode};
pub use report::report_table;
pub use run::{run, ClassifyRow, RunManifest, RunOptions, RunOutput};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        if e.is_input_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "zoaudit", version, about = "Zeroth-order optimizer privacy audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Output directory (default: the config's out_dir, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump a few full trajectories per side (not used in certificates).
    #[arg(long)]
    diagnostic_trajectories: bool,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the configured estimator family against the oracle properties.
    Classify(RunArgs),
    /// Run one theorem audit.
    Audit(RunArgs),
    /// Run a theorem audit over a list of iteration counts.
    Sweep(RunArgs),
    /// Print a table of report files or directories of reports.
    Report {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

fn execute(cmd: Command) -> Result<(), CliError> {
    let (args, allowed): (RunArgs, &[Mode]) = match cmd {
        Command::Report { paths } => {
            print!("{}", report_table(&paths)?);
            return Ok(());
        }
        Command::Classify(a) => (a, &[Mode::Classify]),
        Command::Audit(a) => (a, &[Mode::AuditThm1, Mode::AuditThm2, Mode::AuditThm3]),
        Command::Sweep(a) => (a, &[Mode::SweepT]),
    };
    let mut cfg = parse_config(&args.config)?;
    if !allowed.contains(&cfg.mode) {
        return Err(CliError::Config(format!(
            "mode {} is run by `zoaudit {}`",
            cfg.mode,
            cfg.mode.command()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = Some(trials);
    }
    cfg.validate()?;
    let out_dir = args
        .out
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let opts = RunOptions {
        out_dir,
        diagnostic_trajectories: args.diagnostic_trajectories,
        workers: args.workers,
    };
    let output = run(&cfg, &opts)?;
    for path in &output.written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Run the command line on `args` (including the program name) and return
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
