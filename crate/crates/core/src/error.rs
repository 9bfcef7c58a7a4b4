use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty domain")]
    EmptyDomain,
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("unbounded domain {0} requires a truncation window")]
    Unbounded(String),
    #[error("invalid exponent p = {0}; p must lie in [1, inf]")]
    InvalidP(f64),
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("kernel norm bound is not finite")]
    NonFiniteNorm,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("divergent truncation: L1 norm changes from {small} to {doubled} under window doubling")]
    DivergentTruncation { small: f64, doubled: f64 },
    #[error("no common convergence window for the bilateral Laplace transforms")]
    EmptyConvergenceWindow,
    #[error("profile is not supported in [0, inf): nonzero value {value} at t = {at}")]
    NegativeSupport { at: f64, value: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
