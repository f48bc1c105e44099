use alloc::string::String;

/// Errors reported by the core library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A construction produced an object violating its invariants.
    #[error("construction error: {0}")]
    Construction(String),
    /// Malformed input data.
    #[error("format error: {0}")]
    Format(String),
    /// The request exceeds a documented implementation cap.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Fixed-width integer arithmetic would overflow.
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
