use alloc::string::String;

/// Errors raised by the core routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request is valid but larger than the implementation supports.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A matrix that must have full column rank does not.
    #[error("matrix is rank deficient")]
    RankDeficient,
    /// A lattice basis is too ill-conditioned for exact enumeration.
    #[error("basis condition number {0:.3e} exceeds the enumeration limit")]
    IllConditioned(f64),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(alloc::format!($($arg)*))
    };
}
pub(crate) use domain;
