//! Command-line driver for binning information-loss experiments.
//!
//! A run is one JSON config (see [`config::ExperimentConfig`]) and one
//! command; reports go to an output directory as JSON and CSV.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::Path;

pub use commands::{cmd_analyze, cmd_conv_example, cmd_mc_validate, cmd_sweep_bins};
pub use config::ExperimentConfig;
pub use error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    SweepBins,
    ConvExample,
    McValidate,
}

/// Overrides from the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub nodes: Option<usize>,
}

/// Loads the config, applies overrides and runs the command.
pub fn run(
    command: Command,
    config_path: &Path,
    out: &Path,
    overrides: Overrides,
) -> Result<(), CliError> {
    let mut config = ExperimentConfig::load(config_path)?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(nodes) = overrides.nodes {
        if nodes == 0 {
            return Err(CliError::Config("--nodes must be at least 1".into()));
        }
        config.quadrature.nodes_per_axis = nodes;
    }
    match command {
        Command::Analyze => cmd_analyze(&config, out).map(drop),
        Command::SweepBins => cmd_sweep_bins(&config, out).map(drop),
        Command::ConvExample => cmd_conv_example(&config, out).map(drop),
        Command::McValidate => cmd_mc_validate(&config, out).map(drop),
    }
}
