use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A size guard protecting an exponential-time routine was exceeded.
    #[error("resource guard exceeded: {0}")]
    Resource(String),
    /// A Gaussian state failed a physicality check; the message names the
    /// violated invariant.
    #[error("invalid Gaussian state: {0}")]
    Validation(String),
    /// A quantity that must be real (or must agree between two routes) did not.
    #[error("numerical consistency error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn guard(value: usize, max: usize, what: &str) -> Result<()> {
    if value > max {
        Err(Error::Resource(format!("{what} = {value} exceeds the limit of {max}")))
    } else {
        Ok(())
    }
}
