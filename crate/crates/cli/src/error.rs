use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    /// 1 for anything the user can fix in the config, 2 for numerical
    /// breakdown (degeneracy crossings, loss of unitarity).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl From<geophase::Error> for CliError {
    fn from(e: geophase::Error) -> Self {
        match e {
            geophase::Error::InvalidInput(_) | geophase::Error::Configuration(_) => {
                CliError::Config(e.to_string())
            }
            geophase::Error::OutOfRange { .. } | geophase::Error::DegeneracyCrossing { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
