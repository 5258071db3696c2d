use thiserror::Error;

/// Errors raised by the numerical kernel, model assembly and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("vector length {0} is not a perfect square")]
    NotPerfectSquare(usize),

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("eigenvalue iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("invalid field `{field}`: {message}")]
    InvalidField { field: String, message: String },

    #[error("full-chain space of dimension {dim} exceeds the limit {limit}")]
    ChainTooLarge { dim: usize, limit: usize },

    #[error("projector family is incomplete (residual {residual:.3e})")]
    IncompleteFamily { residual: f64 },

    #[error("eigenvalue clusters unresolved: distinct clusters {separation:.3e} apart at tolerance {tolerance:.1e}")]
    UnresolvedClusters { separation: f64, tolerance: f64 },

    #[error("schedule violates its integer constraint: {0}")]
    Schedule(String),

    #[error("order fit needs at least {needed} positive errors, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate coupling: {0}")]
    DegenerateCoupling(String),

    #[error("eigenvalue branches cannot be tracked: {0}")]
    AmbiguousBranches(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidField { field: field.into(), message: message.into() }
    }
}
