use thiserror::Error;

/// Exit statuses: 0 pass, 1 falsification, 2 configuration, 3 numeric failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] unipotent_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Io(_) | CliError::Json(_) => 2,
            CliError::Config(_) | CliError::UnknownSuite(_) | CliError::Core(_) => 2,
        }
    }
}
