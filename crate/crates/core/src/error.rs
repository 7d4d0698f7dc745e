use thiserror::Error;

/// Errors raised by model evaluation, fitting and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} subintervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("root finding failed: {0}")]
    Root(String),

    #[error("no uncensored pairs above the censoring threshold")]
    NoUncensoredPairs,

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
