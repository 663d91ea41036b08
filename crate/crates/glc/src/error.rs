use thiserror::Error;

/// Unified error type for the whole crate.
///
/// Operations that can fail return `Result<_, Error>`; "absent" results
/// (e.g. no Euler circuit exists) are modelled with `Option`, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("invalid separation: {0}")]
    InvalidSeparation(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("odd cut present: {0}")]
    OddCutPresent(String),
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("would create a loop: {0}")]
    WouldCreateLoop(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid thread: {0}")]
    InvalidThread(String),
    #[error("no odd cut: {0}")]
    NoOddCut(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("subdivide loops first: {0}")]
    SubdivideFirst(String),
    #[error("construction invariant violated: {0}")]
    ConstructionInvariantViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
