use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Input(darkport::Error),
    #[error("numerical failure: {0}")]
    Numerical(darkport::Error),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 0 success, 1 bad arguments, 2 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) | CliError::Validation(_) => 2,
        }
    }
}

impl From<darkport::Error> for CliError {
    fn from(e: darkport::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Input(e)
        }
    }
}
