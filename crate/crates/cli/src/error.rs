use std::path::PathBuf;

use crate::oa_text::OaFileError;

/// Everything the command line can fail with. All of these map to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON in {origin}: {source}")]
    Json {
        origin: String,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    OaFile(#[from] OaFileError),
    #[error(transparent)]
    Core(#[from] ame_core::Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("unknown scenario {id:?}; available: {}", available.join(", "))]
    UnknownScenario { id: String, available: Vec<&'static str> },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
