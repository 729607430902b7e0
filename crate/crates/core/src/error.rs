use thiserror::Error;

/// Errors produced by parsing, simulation, and the deciders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed line in the circuit or truth-table text.
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// Structurally well-formed input that violates an invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A postselection (or conditioning event) has zero probability.
    #[error("postselection on a zero-probability event")]
    ZeroProbability,

    /// Measurement requested on a state whose total probability mass is zero.
    #[error("total probability mass is zero")]
    ZeroMass,

    /// Gate outside the set supported by the path-sum backend.
    #[error("unsupported gate for this backend: {0}")]
    UnsupportedGate(String),

    #[error("path budget exceeded: {required} branch bits requested, cap is {cap}")]
    PathBudgetExceeded { required: usize, cap: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// Numeric argument outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn syntax(line: usize, column: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: msg.into(),
        }
    }
}
