//! Experiment configuration, persistence and command line for `oscstat`.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;

pub use config::{validate_config, Experiment, ExperimentConfig};
pub use error::{HarnessError, HarnessResult};
pub use experiment::{run_experiment, ExperimentReport, RunOptions};
