use thiserror::Error;

/// Failure of a command, mapped onto the documented exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("did not converge: {0}")]
    Convergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Convergence(_) => 4,
        }
    }
}

impl From<calabi::Error> for CliError {
    fn from(e: calabi::Error) -> Self {
        match e {
            calabi::Error::Convergence { .. } => CliError::Convergence(e.to_string()),
            calabi::Error::DegenerateEndpoints => {
                CliError::Input(format!("{e} (the two inputs describe the same point)"))
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
