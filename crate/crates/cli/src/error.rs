use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Rejected material or problem data.
    #[error(transparent)]
    Model(stefan_core::Error),

    #[error("solver failed: {0}")]
    Solver(stefan_core::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    /// Process exit status: 2 config, 3 solver, 4 verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Read { .. } | CliError::Write { .. } | CliError::Model(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

/// Classifies a core error raised while building the problem: parameter
/// and classification failures are configuration errors.
pub fn model_error(e: stefan_core::Error) -> CliError {
    use stefan_core::Error as E;
    match e {
        E::InvalidParameter { .. } | E::UnsupportedDiffusivity(_) | E::Domain(_) => CliError::Model(e),
        other => CliError::Solver(other),
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
