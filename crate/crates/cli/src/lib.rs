//! Experiment driver for the `prony-lab` command: configuration, synthetic
//! measurements by quadrature, task runners and result files.

pub mod config;
pub mod error;
pub mod experiment;
pub mod quadrature;

pub use config::{ExperimentConfig, TaskKind};
pub use error::CliError;
pub use experiment::{run_experiment, write_outputs, RunOutput};
pub use quadrature::{compute_moments, QuadratureSpec};
