use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("improper transfer function: numerator degree {num_deg} exceeds denominator degree {den_deg}")]
    ImproperTransferFunction { num_deg: usize, den_deg: usize },

    #[error("leading denominator coefficient is zero")]
    ZeroLeadingDenominator,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unstable filter: time constant {tau} s must exceed half the sampling period {ts} s")]
    UnstableFilter { tau: f64, ts: f64 },

    #[error("filter order must be at least 1")]
    ZeroFilterOrder,

    #[error("non-minimum-phase model: zero at magnitude {0} outside the unit circle, inverse not stable")]
    NonMinimumPhase(f64),

    #[error("plant is not open-loop stable: spectral radius {0}")]
    UnstablePlant(f64),

    #[error("{context}: rank certification failed, got rank {got} (expected {expected}); singular values {sv:?}")]
    RankCertification {
        context: String,
        got: usize,
        expected: usize,
        sv: Vec<f64>,
    },

    #[error("data matrix used before rank certification")]
    Uncertified,

    #[error("trajectory length error: {0}")]
    TrajectoryLength(String),

    #[error("non-finite signal at step {step} ({signal})")]
    NonFinite { step: usize, signal: &'static str },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
