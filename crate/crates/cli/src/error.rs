use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config schema error: {0}")]
    Schema(String),
    #[error("physics error: {0}")]
    Physics(#[from] adiashort::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad trajectory file {path}: {reason}")]
    Trajectory { path: PathBuf, reason: String },
    #[error("{0} acceptance check(s) failed")]
    VerifyFailed(usize),
    #[error("thread pool: {0}")]
    Threads(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Schema(_) => ExitCode::from(2),
            Self::Physics(_) => ExitCode::from(3),
            _ => ExitCode::from(1),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
