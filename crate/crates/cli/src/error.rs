use std::path::PathBuf;

use thiserror::Error;

/// Everything a command can fail with, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] photon_cumulants::Error),
    #[error("verification mismatch: {0}")]
    Mismatch(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 0 ok, 2 bad input, 3 resource guard, 4 verification mismatch.
    pub fn exit_code(&self) -> u8 {
        use photon_cumulants::Error as E;
        match self {
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Core(E::Domain(_) | E::Validation(_)) => 2,
            CliError::Core(E::Resource(_)) => 3,
            CliError::Core(E::Numerical(_)) | CliError::Mismatch(_) => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
