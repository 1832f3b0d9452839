use std::path::PathBuf;

use bdg_core::BdgError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown scenario `{0}` (expected fig1-balanced, fig1-imbalanced, fig2-core or custom)")]
    UnknownScenario(String),
    #[error("{path}:{line}: {message}")]
    ConfigFile {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed profile row")]
    MalformedProfile { path: PathBuf, line: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Solver(#[from] BdgError),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
