//! Experiment harness for `sfts-core`: synthetic instances, seeded parallel
//! trials, CSV and JSON output.

pub mod cli;
pub mod config;
pub mod instance;
pub mod output;
pub mod run;
pub mod tasks;

pub use config::{ExperimentConfig, Task};
pub use run::{run, RunResult, Summary, TrialRow};
