use fbsde_core::FbsdeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config key `{key}`: {message}")]
    Validation { key: String, message: String },
    #[error("{0}")]
    Model(#[from] FbsdeError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{failed} of {total} checks failed")]
    CheckFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            key: key.into(),
            message: message.into(),
        }
    }

    /// 1 validation, 2 numerical failure, 3 check breach.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } | CliError::Io { .. } => 1,
            CliError::Model(e) => match e {
                FbsdeError::TooManyInvalidPaths { .. }
                | FbsdeError::AllPathsFloored(_)
                | FbsdeError::Cfl { .. }
                | FbsdeError::NonFinitePde { .. } => 2,
                _ => 1,
            },
            CliError::CheckFailed { .. } => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
