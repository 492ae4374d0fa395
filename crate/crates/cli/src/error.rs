use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(#[from] bellcond_core::Error),
    #[error("{failed} of {total} verification checks failed")]
    Verify { failed: usize, total: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Verify { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
