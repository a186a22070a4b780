//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LieharmError {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cap must be >= 1, got {0}")]
    InvalidCap(f64),

    #[error("{0}")]
    Parse(#[from] crate::opalg::ParseError),

    #[error("unnormalized generator kind {0} (run normalize first)")]
    UnnormalizedGenerator(String),

    #[error("unsupported symbol structure: {0}")]
    UnsupportedStructure(String),

    #[error("missing frequency {0}")]
    MissingFrequency(String),

    #[error("coefficient file error at line {line}: {message}")]
    CoeffFormat { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("compatibility violation at {0}")]
    Compatibility(String),

    #[error("inconsistent right-hand side at {0}")]
    InconsistentRhs(String),

    #[error("witness strategy/shape mismatch: {0}")]
    StrategyMismatch(String),

    #[error("{0}")]
    Invalid(String),
}
