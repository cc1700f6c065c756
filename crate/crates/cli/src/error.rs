use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: mwnoise::Error,
    },

    #[error(transparent)]
    Core(#[from] mwnoise::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 2 for bad input, 3 for numerical failures.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Core(mwnoise::Error::Integration(_) | mwnoise::Error::FitNotTrusted { .. }) => ExitCode::from(3),
            _ => ExitCode::from(2),
        }
    }
}
