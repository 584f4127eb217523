//! Error type shared by the library operations.

use thiserror::Error;

/// Failure modes of the library surface.
///
/// Divergent tail integrals are *not* errors; they are reported through
/// [`crate::weight::MaybeDivergent`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Two grid objects do not live on the same [`crate::measure::GridDomain`].
    #[error("domain mismatch: {0}")]
    DomainMismatch(&'static str),
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The operation requires a function that is not identically zero.
    #[error("function is identically zero")]
    EmptyFunction,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
