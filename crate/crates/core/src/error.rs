use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("SINR denominator {0:e} is not positive; statistics are inconsistent")]
    NonPositiveDenominator(f64),

    #[error("simplex exceeded {0} pivots")]
    IterationLimit(usize),

    #[error("{0}")]
    Invalid(String),
}
