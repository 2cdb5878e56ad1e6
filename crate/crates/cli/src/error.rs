use std::path::PathBuf;

use nsp_core::NspError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration; the message names the offending field.
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] NspError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(field: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{field}: {msg}"))
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Checkpoint written by an aborted integration, if any.
    pub fn checkpoint(&self) -> Option<&std::path::Path> {
        match self {
            CliError::Core(NspError::Aborted { checkpoint, .. }) => checkpoint.as_deref(),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
