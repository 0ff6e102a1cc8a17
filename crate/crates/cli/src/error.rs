//! Error kinds of the driver and their exit codes.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown experiment: {0}")]
    UnknownExperiment(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("self-test failed: {0}")]
    SelftestFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::UnknownExperiment(_) => 2,
            CliError::InvalidParameter(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Io(_) => 5,
            CliError::SelftestFailed(_) => 6,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::UnknownExperiment(_) => "unknown_experiment",
            CliError::InvalidParameter(_) => "invalid_parameter",
            CliError::Solver(_) => "solver_failure",
            CliError::Io(_) => "io_failure",
            CliError::SelftestFailed(_) => "selftest_failure",
        }
    }

    /// One-line JSON report for stderr.
    pub fn report(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            exit_code: u8,
            message: String,
        }
        let r = Report { error: self.kind(), exit_code: self.exit_code(), message: self.to_string() };
        serde_json::to_string(&r).unwrap_or_else(|_| self.to_string())
    }
}

pub fn invalid<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::InvalidParameter(msg.into()))
}

impl From<akpz::Error> for CliError {
    fn from(e: akpz::Error) -> Self {
        use akpz::Error as E;
        match e {
            E::Domain(_) | E::Config(_) | E::Unsupported(_) => CliError::InvalidParameter(e.to_string()),
            E::Solver { .. } | E::Integration { .. } => CliError::Solver(e.to_string()),
            E::Io(_) | E::Csv(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
