use thiserror::Error;

/// Errors produced by the library.
///
/// The variants are grouped so that a front end can map them onto distinct
/// exit codes: input problems, undefined normalization, capacity limits and
/// solver/internal failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// The table does not cover the index space of its scenario.
    #[error("structural error: {0}")]
    Structure(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("normalization undefined: {0}")]
    ZeroNormalizer(String),

    #[error("capacity exceeded: {what} count {count} exceeds cap {cap}")]
    Capacity {
        what: &'static str,
        count: u128,
        cap: u128,
    },

    #[error("invalid quantum input: {0}")]
    Quantum(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
