//! Experiment runner for group-testing designs: builds a measurement graph
//! from a TOML config, certifies the claimed properties, simulates and
//! decodes every configured trial, and writes deterministic reports.

pub mod config;
pub mod pipeline;
pub mod sweep;

pub use config::ExperimentConfig;
pub use pipeline::{run_experiment, ExperimentResult};
pub use sweep::{sweep, SweepOutcome};
