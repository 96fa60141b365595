use thiserror::Error;

/// Broad classification used by front ends to map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The caller handed us something malformed or out of contract.
    Input,
    /// A mathematical guarantee failed to hold at runtime.
    Internal,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid chain selection: {0}")]
    InvalidChain(String),
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("cap too small: {0}")]
    CapTooSmall(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no slice crossing in interval: {0}")]
    NoSliceCrossing(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("iteration cap exceeded: {0}")]
    IterationCap(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("snap rejected: {0}")]
    SnapRejected(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Singular(_)
            | Error::IterationCap(_)
            | Error::Invariant(_)
            | Error::SnapRejected(_) => ErrorKind::Internal,
            _ => ErrorKind::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
