// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: configuration, orchestration of the simulation and
//! tomography pipeline, and table/plot output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::Context;
use crate::config::{ExperimentConfig, ForwardModelSetting, Overrides, ShotsSetting};
pub use crate::error::CliError;

/// Worker-count variable for the thread pool.
pub const WORKERS_ENV: &str = "MAGBELL_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Auto,
    Ideal,
    Lindblad,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "magbell", version, about = "Qubit-magnon Bell-state simulation and tomography")]
pub struct Cli {
    /// TOML configuration file; defaults are used for missing keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Shots per setting, or "exact" for noise-free expectation values.
    #[arg(long, global = true, value_parser = parse_shots)]
    pub shots: Option<ShotsSetting>,
    /// Decoherence during simulation.
    #[arg(long, global = true)]
    pub noise: Option<Switch>,
    /// Forward model used by the reconstruction.
    #[arg(long = "forward-model", global = true)]
    pub forward_model: Option<ModelArg>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_shots(s: &str) -> Result<ShotsSetting, String> {
    s.parse()
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Swap oscillation P+(tau) with a damped-cosine fit.
    Swap,
    /// Qubit purity versus swap time.
    Purity,
    /// Normal-mode spectrum through the qubit-magnon resonance.
    Crossing,
    /// Prepare the Bell state and simulate the tomography dataset.
    Generate,
    /// Reconstruct the joint state from a dataset.
    Reconstruct {
        /// Dataset file; defaults to dataset.csv in the output directory.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Convergence of results with the Fock cutoff.
    SweepTruncation {
        /// Comma-separated n_max values; defaults to the config list.
        #[arg(long = "n-max", value_delimiter = ',')]
        n_max: Vec<usize>,
    },
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            shots: self.shots,
            noise: self.noise.map(|s| s == Switch::On),
            forward_model: self.forward_model.map(|m| match m {
                ModelArg::Auto => ForwardModelSetting::Auto,
                ModelArg::Ideal => ForwardModelSetting::Ideal,
                ModelArg::Lindblad => ForwardModelSetting::Lindblad,
            }),
        }
    }

    /// File configuration with command-line overrides applied.
    pub fn effective_config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&self.overrides());
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Worker count from the environment; unset means one per available core.
pub fn workers_from_env() -> Result<usize, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn emit(out: &mut dyn Write, lines: &[String]) -> Result<(), CliError> {
    for l in lines {
        writeln!(out, "{l}").map_err(|e| CliError::Io { path: "<stdout>".into(), reason: e.to_string() })?;
    }
    Ok(())
}

/// Runs one command inside a pool of `workers` threads, printing its
/// summary to `out`.
pub fn run(cli: &Cli, workers: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let config = cli.effective_config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let ctx = Context { config, out_dir: cli.out.clone(), workers };
    let (lines, outcome) = pool.install(|| -> Result<(Vec<String>, Result<(), CliError>), CliError> {
        Ok(match &cli.command {
            Command::Swap => (commands::cmd_swap(&ctx)?.lines(), Ok(())),
            Command::Purity => (commands::cmd_purity(&ctx)?.lines(), Ok(())),
            Command::Crossing => (commands::cmd_crossing(&ctx)?.lines(), Ok(())),
            Command::Generate => (commands::cmd_generate(&ctx)?.lines(), Ok(())),
            Command::Reconstruct { dataset } => {
                let report = commands::cmd_reconstruct(&ctx, dataset.as_deref())?;
                let status = if report.converged {
                    Ok(())
                } else {
                    Err(CliError::NonConvergence { iterations: report.iterations })
                };
                (report.lines(), status)
            }
            Command::SweepTruncation { n_max } => {
                let list = if n_max.is_empty() { None } else { Some(n_max.as_slice()) };
                (commands::cmd_sweep_truncation(&ctx, list)?.lines(), Ok(()))
            }
        })
    })?;
    emit(out, &lines)?;
    outcome
}
