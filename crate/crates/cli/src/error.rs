use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("numerical failure: {0}")]
    Numerical(#[from] debranges_core::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Read { .. } => 2,
            CliError::Numerical(_) | CliError::Write { .. } => 3,
        })
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}
