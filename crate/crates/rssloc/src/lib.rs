//! Experiment harness, file formats and command-line front end for the
//! `rssloc-core` estimators.

pub mod bench;
pub mod cli;
pub mod error;
pub mod io;
pub mod report;

pub use bench::{
    run_experiment, time_scaling, ConfigError, EstimatorKind, ExperimentConfig, ReportRow,
    ScenarioSource, Sweep, TimingConfig, TimingPoint, TrialReport,
};
