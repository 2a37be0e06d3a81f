use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("time {t} outside window [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    /// The tracked eigensubspace changed dimension, i.e. the target level
    /// crossed or split from another one.
    #[error("degeneracy crossing at t = {t}: subspace dimension {expected} became {found}")]
    DegeneracyCrossing {
        t: f64,
        expected: usize,
        found: usize,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
