use serde_json::json;
use thiserror::Error;

/// Failure of a command, mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// The distribution or request could not be read or is invalid.
    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] poincare::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// The self-test found mismatches.
    #[error("{0} self-test check(s) failed")]
    SelfTest(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) => match e {
                poincare::Error::Domain(_) | poincare::Error::Argument(_) | poincare::Error::Precondition(_) => 2,
                _ => 3,
            },
            CliError::Io(_) | CliError::Csv(_) | CliError::SelfTest(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "invalid_input",
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "io",
            CliError::Csv(_) => "csv",
            CliError::SelfTest(_) => "selftest",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() } })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
