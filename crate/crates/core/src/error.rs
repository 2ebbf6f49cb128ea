use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A structural requirement on the inputs does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A grid or quadrature plan is too coarse for the requested evaluation.
    #[error("resolution too coarse for {what}: need at least {required}")]
    Resolution { what: String, required: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
