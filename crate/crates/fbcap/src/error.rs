use fbcap_core::Error;
use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{0}")]
    NoConvergence(String),
    #[error("internal check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::NoConvergence(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::UnsupportedForm(_) => CliError::Invalid(e.to_string()),
            // a lost covariance factorization is a numerical breakdown, not bad input
            Error::NoConvergence { .. } | Error::Conditioning(_) => {
                CliError::NoConvergence(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}
