use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration; `key` names the offending entry when known.
    #[error("invalid config{}: {message}", key.as_ref().map(|k| format!(" at `{k}`")).unwrap_or_default())]
    Config {
        key: Option<String>,
        message: String,
    },
    #[error("experiment `{requested}` does not match the config's experiment `{configured}`")]
    ExperimentMismatch {
        requested: String,
        configured: String,
    },
    #[error(transparent)]
    Numeric(#[from] specgeo_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("nothing to report: {0}")]
    Empty(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            key: Some(key.to_string()),
            message: message.into(),
        }
    }

    /// Parse errors from serde name the key between backticks
    /// ("unknown field `x`", "missing field `x`").
    pub(crate) fn from_json(e: serde_json::Error) -> Self {
        let message = e.to_string();
        let key = ["unknown field `", "missing field `", "unknown variant `"]
            .iter()
            .find_map(|pat| {
                let start = message.find(pat)? + pat.len();
                let len = message[start..].find('`')?;
                Some(message[start..start + len].to_string())
            });
        CliError::Config { key, message }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Offending configuration key, for config errors.
    pub fn key(&self) -> Option<&str> {
        match self {
            CliError::Config { key, .. } => key.as_deref(),
            _ => None,
        }
    }
}
