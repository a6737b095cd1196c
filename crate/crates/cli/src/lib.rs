//! Experiment runner behind the `fbsde-lab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod runner;

pub use config::{ExperimentConfig, GridConfig, ProviderChoice, EXPERIMENTS};
pub use error::{CliError, CliResult};
pub use experiments::run_experiment;
pub use output::{Check, Csv, ExperimentOutput};
pub use runner::{execute, RunOptions};
