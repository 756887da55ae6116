use std::io;
use std::path::Path;

use serde::Serialize;

use crate::msgf::MsgfError;

/// Exit code for validation errors.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for an unknown or missing subcommand (`EX_USAGE`).
pub const EXIT_USAGE: i32 = 64;
/// Exit code for file I/O failures (`EX_IOERR`).
pub const EXIT_IO: i32 = 74;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Validation { message: String, field: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

/// The machine-readable error document written to standard error.
#[derive(Debug, Serialize)]
pub struct ErrorDoc<'a> {
    pub error: &'a str,
    pub field: &'a str,
}

impl CliError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            message: message.into(),
            field: field.into(),
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Wraps an MSGF failure: I/O problems keep their exit code, malformed
    /// content is a validation error on `field`.
    pub fn msgf(path: &Path, field: &str, err: MsgfError) -> Self {
        match err {
            MsgfError::Io(source) => CliError::io(path, source),
            MsgfError::Format(reason) => {
                CliError::validation(field, format!("{}: {reason}", path.display()))
            }
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }

    pub fn field(&self) -> &str {
        match self {
            CliError::Validation { field, .. } => field,
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "command",
        }
    }
}

impl From<mulspace_core::Error> for CliError {
    fn from(e: mulspace_core::Error) -> Self {
        CliError::validation(e.field(), e.to_string())
    }
}
