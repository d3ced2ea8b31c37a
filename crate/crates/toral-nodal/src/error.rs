use std::path::PathBuf;

use toral_nodal_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("numerical failure: {0}")]
    Numerics(CoreError),
}

impl CliError {
    /// 0 is success; 2 flags a failed hard check, 3 a bad config, 4 an IO error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invariant(_) | CliError::Numerics(_) => 2,
            CliError::Config(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvariantViolation(m) => CliError::Invariant(m),
            CoreError::NonConvergence { .. } => CliError::Numerics(e),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
