use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid experiment: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] pcp_core::Error),

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// Process exit status for this error: every failure that is not a
    /// tolerance violation maps to the usage/config status.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
