use std::path::PathBuf;

use midstar_core::Error;
use thiserror::Error as ThisError;

/// Exit codes of the `midstar` binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NON_CONVERGENT: i32 = 3;
    pub const DOMAIN: i32 = 4;
    pub const SINGULAR: i32 = 5;
    pub const VERIFY_FAILED: i32 = 6;
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] Error),

    #[error("{failed} of {total} checks failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::VerifyFailed { .. } => exit::VERIFY_FAILED,
            CliError::Core(e) => match e {
                Error::NonConvergent { .. } | Error::NoConvergence { .. } => exit::NON_CONVERGENT,
                Error::SingularHessian | Error::IllConditioned | Error::NearSingular => exit::SINGULAR,
                e if e.is_domain_error() => exit::DOMAIN,
                _ => exit::USAGE,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
