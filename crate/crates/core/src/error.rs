use thiserror::Error;

pub type Result<T> = std::result::Result<T, PronyError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PronyError {
    /// The Hankel system lost rank. `effective_rank` is the largest model
    /// order the data supports, so callers can retry with it.
    #[error("Hankel system is rank deficient: effective rank {effective_rank}, requested order {requested}")]
    SingularHankel {
        effective_rank: usize,
        requested: usize,
    },

    #[error("Padé denominator vanishes at the origin; moments are not generated by a Prony model of order {requested}")]
    DegenerateDenominator { requested: usize },

    #[error(
        "root finder did not converge within {iterations} iterations (backward error {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("nodes {first} and {second} are closer than the clustering tolerance")]
    DuplicateNodes { first: usize, second: usize },

    #[error("matrix is numerically singular")]
    SingularMatrix,

    #[error("amplitude {index} has magnitude {magnitude:e}, below the floor; the model order is probably overestimated")]
    AmplitudeBelowFloor { index: usize, magnitude: f64 },

    #[error("recovered nodes {first} and {second} collide; the data looks confluent")]
    NodeCollision { first: usize, second: usize },

    #[error("recovered multiplicities {found:?} do not match the requested pattern {expected:?}")]
    MultiplicityMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("recovered amplitudes {first} and {second} on axis {axis} are not separable")]
    AmbiguousAmplitudes {
        axis: usize,
        first: usize,
        second: usize,
    },

    #[error("amplitudes recovered on axis {axis} disagree with axis 0 by {discrepancy:e}")]
    InconsistentAxes { axis: usize, discrepancy: f64 },

    #[error("kernel has zero mean; no convolution-dual system exists")]
    ZeroMeanKernel,

    #[error("kernel Fourier transform vanishes at frequency {frequency}")]
    ZeroFourierCoefficient { frequency: usize },

    #[error("need {needed} moments, got {available}")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("jump magnitudes sum to {sum:e}, exceeding tolerance {tolerance:e}")]
    InconsistentJumps { sum: f64, tolerance: f64 },

    #[error("{failed} of {trials} trials failed; aborting experiment")]
    ExperimentAborted { failed: usize, trials: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl PronyError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            PronyError::SingularHankel { .. } => "SingularHankel",
            PronyError::DegenerateDenominator { .. } => "DegenerateDenominator",
            PronyError::NoConvergence { .. } => "NoConvergence",
            PronyError::DuplicateNodes { .. } => "DuplicateNodes",
            PronyError::SingularMatrix => "SingularMatrix",
            PronyError::AmplitudeBelowFloor { .. } => "AmplitudeBelowFloor",
            PronyError::NodeCollision { .. } => "NodeCollision",
            PronyError::MultiplicityMismatch { .. } => "MultiplicityMismatch",
            PronyError::AmbiguousAmplitudes { .. } => "AmbiguousAmplitudes",
            PronyError::InconsistentAxes { .. } => "InconsistentAxes",
            PronyError::ZeroMeanKernel => "ZeroMeanKernel",
            PronyError::ZeroFourierCoefficient { .. } => "ZeroFourierCoefficient",
            PronyError::InsufficientMoments { .. } => "InsufficientMoments",
            PronyError::InconsistentJumps { .. } => "InconsistentJumps",
            PronyError::ExperimentAborted { .. } => "ExperimentAborted",
            PronyError::InvalidInput(_) => "InvalidInput",
        }
    }
}
