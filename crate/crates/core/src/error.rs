use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel dimensions m={m}, n={n}: both antenna counts must be positive")]
    InvalidDims { m: usize, n: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coefficient index {index} outside valid range ({range})")]
    IndexOutOfRange { index: usize, range: String },

    #[error(
        "quadrature failed to converge after {subdivisions} subdivisions \
         (estimated error {error:e}, tolerance {tolerance:e})"
    )]
    Convergence {
        subdivisions: usize,
        error: f64,
        tolerance: f64,
    },

    #[error("log-determinant failed: matrix is not numerically positive definite")]
    Decomposition,

    #[error("malformed coefficient table: {0}")]
    Table(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
