use std::path::PathBuf;
use std::process::ExitCode;

use lattice_probe_core::Error as CoreError;

/// Failure of a command, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input data, flags or configuration. Exit code 2.
    #[error("{0}")]
    Validation(String),
    /// The probability provider misbehaved or was unreachable. Exit code 3.
    #[error("{0}")]
    Provider(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) => 2,
            CliError::Provider(_) => 3,
            CliError::Io { .. } => 1,
        })
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Provider(_) | CoreError::DistributionNotNormalized { .. } | CoreError::EmptyVocabulary => {
                CliError::Provider(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
