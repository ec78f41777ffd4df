use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Arguments violate an operation's preconditions.
    #[error("invalid argument: {0}")]
    Contract(String),
    #[error("eigendecomposition did not converge in sector with {sector} surviving photons")]
    Eigen { sector: usize },
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
