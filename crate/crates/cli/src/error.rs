use rough_burgers::Error;
use serde::Serialize;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    /// Unreadable, malformed or invalid configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Failure inside the library.
    #[error(transparent)]
    Core(#[from] Error),

    /// An oracle comparison in `verify` or a relation check did not pass.
    #[error("check failed: {0}")]
    Check(String),

    /// Could not write outputs.
    #[error("cannot write outputs: {0}")]
    Report(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Report(e.to_string())
    }
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures and failed
    /// checks, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(Error::InvalidConfig(_)) => 2,
            CliError::Core(Error::Solver(_) | Error::Numerical(_)) | CliError::Check(_) => 3,
            CliError::Core(_) | CliError::Report(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Core(Error::InvalidConfig(_)) => "invalid_config",
            CliError::Core(Error::Solver(_)) => "solver_failure",
            CliError::Core(Error::Numerical(_)) => "numerical_failure",
            CliError::Check(_) => "check_failed",
            CliError::Core(_) => "library_error",
            CliError::Report(_) => "output_error",
        }
    }

    pub fn report(&self, command: &str) -> ErrorReport {
        ErrorReport {
            status: "error",
            command: command.to_string(),
            exit_code: self.exit_code(),
            kind: self.kind(),
            message: self.to_string(),
        }
    }
}

/// The machine-readable failure record written to `error.json` and stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub status: &'static str,
    pub command: String,
    pub exit_code: i32,
    pub kind: &'static str,
    pub message: String,
}
