use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("not a valid quantum state: {reason} (offending value {value:.6e})")]
    NotAState { reason: String, value: f64 },

    #[error("epsilon {epsilon} outside admissible range [0, {max}]")]
    EpsilonOutOfRange { epsilon: f64, max: f64 },

    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("invalid channel mixture: {0}")]
    InvalidMixture(String),

    #[error("no entanglement-preserving local thermalization exists: {0}")]
    NoEplt(String),

    #[error("state is not in the GHZ-isotropic family (residual {0:.3e})")]
    NotGhzIsotropic(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
