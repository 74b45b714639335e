//! Experiment workbench: configuration presets, dataset files, experiment
//! drivers and report emission for the `qforge` command-line tool.

pub mod config;
pub mod dataset;
mod error;
pub mod experiments;
pub mod report;
pub mod seeds;
pub mod stats;

pub use config::{ExperimentId, RunConfig, Scale};
pub use dataset::{Dataset, Item};
pub use error::{Result, WbError};
pub use experiments::run_experiment;
pub use report::{emit_report, load_report, verify_report, Condition, RunReport};
