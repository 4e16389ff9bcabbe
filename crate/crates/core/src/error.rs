use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    /// Bounds outside the supported integer range, or an inverted interval.
    #[error("range error: {0}")]
    Range(String),
    /// Mathematical domain violation (rational square root, `s <= 1` for zeta, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid tuning argument such as a non-positive tolerance.
    #[error("argument error: {0}")]
    Argument(String),
    /// Input violates a structural precondition, e.g. a composite modulus.
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub(crate) fn range(msg: impl Into<String>) -> Self {
        LabError::Range(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        LabError::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        LabError::Argument(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        LabError::Precondition(msg.into())
    }
}
