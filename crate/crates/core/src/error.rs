use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum SnowpacError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("{0} has no sample-average integrand; use estimate_quantile instead")]
    NoIntegrand(&'static str),

    #[error("confidence {target} unreachable with these samples; best attainable coverage is {attainable}")]
    CoverageUnreachable { target: f64, attainable: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate node geometry ({0}); improve the interpolation set first")]
    DegenerateGeometry(String),

    #[error("covariance matrix is not positive definite even with maximal jitter")]
    NotPositiveDefinite,

    #[error("the trust-region center violates the augmented constraint models; switch to restoration mode")]
    CenterInfeasible,

    #[error("black-box evaluation failed: {0}")]
    Evaluation(String),

    #[error("no reference optimum available for {0}")]
    MissingOracle(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed data in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SnowpacError>;

pub(crate) fn invalid(msg: impl Into<String>) -> SnowpacError {
    SnowpacError::InvalidArgument(msg.into())
}
