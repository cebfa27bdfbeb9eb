//! Batch driver for `hardyck`: reads an experiment config, runs validators,
//! B computations, ratio checks or parameter sweeps, and writes
//! `report.json`, `report.csv` and `plotdata/*.dat`.
//!
//! Exit codes: 0 success, 1 verdict failure, 2 configuration or I/O error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{cmd_bconst, cmd_check, cmd_sweep, cmd_validate, Outcome, RunOptions};
pub use config::{load_config, parse_config, ExperimentConfig, ProblemConfig, SweepConfig};
pub use report::{Record, Report, Row, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error("computation failed: {0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug, Parser)]
#[command(name = "hardyck", version, about = "Numerical checks of weighted Hardy-type inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Replaces the config's base seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Replaces the quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Inadmissible specs and divergent B pass when found unbounded.
    #[arg(long, global = true)]
    pub expect_unbounded: bool,
    /// Inadmissible specs do not fail `validate`.
    #[arg(long, global = true)]
    pub allow_inadmissible: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the hypotheses of every problem.
    Validate,
    /// Compute B1-B4 (and the critical Hardy B2).
    Bconst,
    /// Run sandwich and grid ratio checks.
    Check,
    /// Sweep one numeric parameter of a problem.
    Sweep {
        /// Problem to vary (overrides `[sweep].problem`).
        #[arg(long)]
        problem: Option<String>,
        /// Dotted field path, e.g. `spec.q`.
        #[arg(long)]
        axis: Option<String>,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
}

fn apply_overrides(cli: &Cli, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!("--tol must be positive, got {tol}")));
        }
        cfg.tolerances.quad = tol;
    }
    if let Command::Sweep { problem, axis, start, stop, steps } = &cli.command {
        let base = cfg.sweep.clone();
        let pick = |o: &Option<String>, f: fn(&SweepConfig) -> String| o.clone().or_else(|| base.as_ref().map(f));
        let sweep = SweepConfig {
            problem: pick(problem, |s| s.problem.clone()).ok_or_else(|| CliError::Config("sweep needs a problem".into()))?,
            axis: pick(axis, |s| s.axis.clone()).ok_or_else(|| CliError::Config("sweep needs an axis".into()))?,
            start: start.or(base.as_ref().map(|s| s.start)).ok_or_else(|| CliError::Config("sweep needs a start".into()))?,
            stop: stop.or(base.as_ref().map(|s| s.stop)).ok_or_else(|| CliError::Config("sweep needs a stop".into()))?,
            steps: steps.or(base.as_ref().map(|s| s.steps)).ok_or_else(|| CliError::Config("sweep needs steps".into()))?,
        };
        if !cfg.problems.iter().any(|p| p.name() == sweep.problem) {
            return Err(CliError::Config(format!("sweep refers to unknown problem `{}`", sweep.problem)));
        }
        cfg.sweep = Some(sweep);
    }
    Ok(())
}

/// Runs the selected command and writes its outputs.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut cfg = load_config(path)?;
    apply_overrides(cli, &mut cfg)?;
    let run = RunOptions { expect_unbounded: cli.expect_unbounded, allow_inadmissible: cli.allow_inadmissible };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().map_err(|e| CliError::Run(e.to_string()))?;
    let outcome = pool.install(|| match cli.command {
        Command::Validate => cmd_validate(&cfg, &run),
        Command::Bconst => cmd_bconst(&cfg, &run),
        Command::Check => cmd_check(&cfg, &run),
        Command::Sweep { .. } => cmd_sweep(&cfg, &run),
    })?;
    let o = cfg.outputs;
    outcome.report.write(&cli.out, o.json, o.csv, o.plotdata)?;
    Ok(outcome)
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(o) => o.exit_code,
        Err(e) => {
            eprintln!("hardyck: {e}");
            e.exit_code()
        }
    }
}
