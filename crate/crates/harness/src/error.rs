use std::path::PathBuf;

use thiserror::Error;

use crate::config::Origin;

/// Errors raised by the harness.
#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad configuration; `origin` and `key` locate it when known.
    #[error("config error{}{}: {msg}", origin.map(|o| format!(" at {o}")).unwrap_or_default(), key.as_ref().map(|k| format!(" ({k})")).unwrap_or_default())]
    Config { origin: Option<Origin>, key: Option<String>, msg: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    /// A malformed or mismatched snapshot file.
    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Core(#[from] rotwave_core::Error),

    /// A validation run completed but missed its contract.
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit code: 2 configuration, 3 numeric blow-up, 4 constraint
    /// violation, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use rotwave_core::Error as E;
        match self {
            Self::Config { .. } | Self::Snapshot(_) | Self::Core(E::Config(_)) => 2,
            Self::Core(E::BlowUp { .. }) => 3,
            Self::Core(E::ConstraintViolation { .. }) => 4,
            _ => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
