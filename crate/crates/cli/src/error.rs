use std::fmt;
use std::process::ExitCode;

use swinfer_core::Error;

/// Failure classes, each with its own process exit status.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Dimension(String),
    A1(String),
    Oracle(String),
    Simulator(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Input(_) => 2,
            CliError::Dimension(_) => 3,
            CliError::A1(_) => 4,
            CliError::Oracle(_) => 5,
            CliError::Simulator(_) => 6,
        })
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Dimension(m) | CliError::A1(m) | CliError::Oracle(m) | CliError::Simulator(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::DimensionMismatch { .. } => CliError::Dimension(msg),
            Error::A1Violated { .. } | Error::NuTooLarge { .. } => CliError::A1(msg),
            Error::NoOracle(_) => CliError::Oracle(msg),
            Error::SimulatorFailure(_) => CliError::Simulator(msg),
            _ => CliError::Input(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
