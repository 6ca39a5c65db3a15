use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A stored invariant (determinant, homogeneity, ...) drifted past its tolerance.
    #[error("invariant violated: {0}")]
    Invariant(String),
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    /// Fourier truncation is not resolved by the sample grid.
    #[error("aliasing: {0}")]
    Aliasing(String),
    #[error("enumeration truncated: {0}")]
    Truncated(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}
