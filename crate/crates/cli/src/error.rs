use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed configs, unwritable output paths.
    #[error("{0}")]
    Input(String),

    /// A numerical procedure failed on valid input.
    #[error("{0}")]
    Numerical(String),

    /// `--validate` found a summary value that does not reproduce.
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) | CliError::Validation(_) => 3,
        }
    }
}

impl From<rqdyn::Error> for CliError {
    fn from(e: rqdyn::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
