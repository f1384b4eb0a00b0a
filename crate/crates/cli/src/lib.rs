//! Command-line front end: configuration, CSV I/O and subcommands for
//! simulating, fitting, predicting, checking and scoring MTD point processes.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Output;
use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "mtdpp", version, about = "Simulate, fit and check MTD point processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for batch fits.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Simulate a point pattern.
    Simulate,
    /// Fit a pattern file, or every pattern file in a directory.
    Fit,
    /// Posterior predictive draws of the next durations.
    Predict,
    /// Time-rescaling goodness of fit.
    Check,
    /// Forecast scores of predictive draws against realised durations.
    Score,
    /// ACF and PACF of the durations.
    Pacf,
    /// Posterior curves of intensity, marginal density, hazard and weights.
    Curves,
}

/// Resolve the configuration against the flags and run the subcommand.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if cli.jobs.is_some() {
        config.jobs = cli.jobs;
    }
    if cli.out.is_some() {
        config.out = cli.out.clone();
    }
    config.validate().map_err(error::CliError::Usage)?;
    config.apply_seed();
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut out = Output::new(&dir)?;
    match cli.command {
        Command::Simulate => commands::simulate(&config, &mut out)?,
        Command::Fit => commands::fit(&config, &mut out)?,
        Command::Predict => commands::predict(&config, &mut out)?,
        Command::Check => commands::check(&config, &mut out)?,
        Command::Score => commands::score(&config, &mut out)?,
        Command::Pacf => commands::pacf_table(&config, &mut out)?,
        Command::Curves => commands::curves(&config, &mut out)?,
    }
    Ok(out.written().to_vec())
}
