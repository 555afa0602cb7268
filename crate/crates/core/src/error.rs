use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b})")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid rate {0}: must be positive and finite")]
    InvalidRate(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid tree point: branch {branch}, offset {offset}")]
    InvalidPoint { branch: usize, offset: f64 },

    #[error("separation times below {frontier} are not materialized (requested {requested})")]
    NotMaterialized { frontier: f64, requested: f64 },

    #[error("lazy record recursion exceeded {0} levels")]
    RecursionDepth(usize),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("quadrature did not converge: estimate {estimate}, error {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
