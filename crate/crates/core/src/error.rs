//! Crate-wide error type.
//!
//! The three variants map one-to-one onto the CLI exit codes: parameter
//! errors exit 2, data errors exit 3, numerical failures exit 4.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside its mathematical domain (e.g. |rho| >= 1,
    /// a nonpositive eigenvalue, an out-of-range PCA dimension).
    #[error("parameter error: {0}")]
    Param(String),

    /// The input data is malformed (non-finite entries, dimension
    /// mismatches, pools smaller than the requested selection).
    #[error("data error: {0}")]
    Data(String),

    /// A numerical procedure failed (singular matrix, solver
    /// non-convergence, missing sign change in a bracket).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
