use std::fmt;

use serde::{Deserialize, Serialize};

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Exit status for success.
pub const EXIT_OK: u8 = 0;
/// Exit status for invalid input or violated preconditions.
pub const EXIT_VALIDATION: u8 = 2;
/// Exit status for numeric failures.
pub const EXIT_NUMERIC: u8 = 3;

/// An error as reported on stderr: `{error_kind, message, location}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliError {
    pub error_kind: String,
    pub message: String,
    pub location: Option<String>,
    #[serde(skip)]
    pub exit_code: u8,
}

impl CliError {
    pub fn validation(kind: &str, message: impl Into<String>) -> Self {
        Self {
            error_kind: kind.to_string(),
            message: message.into(),
            location: None,
            exit_code: EXIT_VALIDATION,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::validation("usage", message)
    }

    pub fn at(mut self, location: impl Into<String>) -> Self {
        self.location = Some(location.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{} at {loc}: {}", self.error_kind, self.message),
            None => write!(f, "{}: {}", self.error_kind, self.message),
        }
    }
}

impl std::error::Error for CliError {}

impl From<bettest_core::Error> for CliError {
    fn from(e: bettest_core::Error) -> Self {
        use bettest_core::Error;
        let location = match &e {
            Error::ProtocolViolation { round, .. } => Some(format!("round {round}")),
            Error::AtParameter { theta, source } => Some(match source.as_ref() {
                Error::ProtocolViolation { round, .. } => format!("theta = {theta}, round {round}"),
                _ => format!("theta = {theta}"),
            }),
            _ => None,
        };
        Self {
            error_kind: e.kind().to_string(),
            message: e.to_string(),
            location,
            exit_code: if e.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_VALIDATION
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::validation("io", e.to_string())
    }
}
