use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid configuration.
    #[error("invalid input: {0}")]
    Input(String),
    #[error("solve failed: {0}")]
    Solve(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            _ => EXIT_FAILURE,
        }
    }
}

impl From<nanoplate::Error> for CliError {
    fn from(e: nanoplate::Error) -> Self {
        CliError::Solve(e.to_string())
    }
}
