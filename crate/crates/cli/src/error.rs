use std::path::PathBuf;

use ferrolab_core::script::ScriptError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("ModelNotFound: {}", .0.display())]
    ModelNotFound(PathBuf),
    #[error("{0}")]
    Core(#[from] ferrolab_core::Error),
    #[error("{}: {err}", .path.display())]
    Script { path: PathBuf, err: ScriptError },
    #[error("{} error(s) in {}", .count, .path.display())]
    CheckFailed { path: PathBuf, count: usize },
    #[error("{}: {err}", .path.display())]
    Io { path: PathBuf, err: std::io::Error },
    #[error("manifest: {0}")]
    Manifest(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        CliError::Io { path: path.into(), err }
    }
}

pub type CliResult<T> = Result<T, CliError>;
