use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("unsupported dimension {dim}: supported dimensions are {supported}")]
    UnsupportedDimension { dim: usize, supported: String },

    #[error("degenerate span: the three states span a subspace of dimension < 3 (residual {residual:.3e})")]
    DegenerateSpan { residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unsupported by model: {0}")]
    Unsupported(String),

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("incomplete frequency table: {0}")]
    IncompleteTable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
