//! Experiment runner: TOML experiment files in, CSV tables out.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_compare, cmd_rate, cmd_simulate, cmd_theory, CompareReport};
pub use config::{parse_config, parse_config_with, ExperimentSpec, FileConfig, Overrides};
pub use error::{CliError, Result};
