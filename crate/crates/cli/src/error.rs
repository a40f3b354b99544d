use thiserror::Error;

/// Everything that stops a command before it produces a verdict.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error(transparent)]
    Numeric(#[from] polysle::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Usage and configuration problems exit with 3, runtime failures
    /// (numerical errors, IO) with 4.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 3,
            _ => 4,
        }
    }
}
