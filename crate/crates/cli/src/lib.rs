//! Experiment harness: config files in, CSV/JSON artifacts and a manifest out.

pub mod config;
pub mod experiments;
pub mod loaders;
pub mod methods;
pub mod output;
pub mod run;

pub use config::ExperimentConfig;
pub use run::{execute, run, RunOptions, RunOutcome};
