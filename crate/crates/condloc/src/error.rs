use std::path::{Path, PathBuf};

use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

/// Failure of a command, carrying the process exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}: no records")]
    NoRecords { path: PathBuf },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(String),
    #[error("{context}: {source}")]
    Validation { context: String, source: condloc_core::Error },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. }
            | CliError::NoRecords { .. }
            | CliError::Read { .. }
            | CliError::Config(_) => 2,
            CliError::Validation { .. } | CliError::Invalid(_) => 3,
            CliError::Write { .. } | CliError::Internal(_) => 4,
        }
    }

    pub(crate) fn parse(path: &Path, line: usize, msg: impl ToString) -> Self {
        CliError::Parse { path: path.to_path_buf(), line, msg: msg.to_string() }
    }

    pub(crate) fn validation(context: impl Into<String>, source: condloc_core::Error) -> Self {
        CliError::Validation { context: context.into(), source }
    }
}
