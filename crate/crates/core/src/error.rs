use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("gapless at k = {k:.6}: |E| = {energy:.3e} does not exceed the gap threshold")]
    Gapless { k: f64, energy: f64 },

    #[error("occupied rank changes across the k-grid ({first} at k = 0, {other} at k = {k:.6}); grid too coarse or model gapless")]
    RankChange { first: usize, other: usize, k: f64 },

    #[error("eigensolver did not converge at k = {k:.6}")]
    EigenSolver { k: f64 },

    #[error("invalid symmetry operator {label}: {reason}")]
    InvalidSymmetry { label: String, reason: String },

    #[error("{label} is not an involution: its square is not ±1 (deviation {deviation:.3e})")]
    NotInvolution { label: String, deviation: f64 },

    #[error("inconsistent symmetry set: {0}")]
    InconsistentSymmetries(String),

    #[error("symmetry {label} fails on the model (max deviation {deviation:.3e}){at}")]
    SymmetryViolation {
        label: String,
        deviation: f64,
        at: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
