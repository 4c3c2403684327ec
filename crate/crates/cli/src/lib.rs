//! Experiment runner behind the `birkhoff-spectra` binary.
//!
//! An [`ExperimentConfig`] names one experiment and its sizes; [`run_experiment`]
//! samples, reduces and measures, and returns an [`ExperimentReport`] whose
//! `statistics` section is a pure function of the config.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;

pub use config::{parse_config, read_config, ChainSettings, Experiment, ExperimentConfig, OUT_ENV, SCHEMA};
pub use error::{CliError, Result};
pub use report::{read_report, write_report, Artifact, Criterion, ExperimentReport, RunInfo, Statistics};
pub use runner::{run_experiment, RunOptions};
