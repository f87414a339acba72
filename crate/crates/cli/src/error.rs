use serde_json::json;
use thiserror::Error;

use prony_core::PronyError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("quadrature did not reach {tolerance:e} for moment {index} (estimate {estimate:e} at {panels} panels)")]
    QuadratureNotConverged {
        index: usize,
        estimate: f64,
        tolerance: f64,
        panels: usize,
    },
    #[error("solver failed: {0}")]
    Solver(#[from] PronyError),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigInvalid(_) => "ConfigInvalid",
            CliError::QuadratureNotConverged { .. } => "QuadratureNotConverged",
            CliError::Solver(e) => e.kind(),
            CliError::Io { .. } => "Io",
        }
    }

    /// 2 for solver failures, 1 for everything that stops a run early.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

pub fn config_error(msg: impl Into<String>) -> CliError {
    CliError::ConfigInvalid(msg.into())
}
