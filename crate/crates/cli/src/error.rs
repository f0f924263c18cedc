//! CLI error classes and their exit codes.

use std::fmt;
use std::path::Path;

/// Exit codes: 0 success, 2 configuration, 3 data, 4 internal invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Internal => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Config, message: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Data, message: msg.into() }
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Internal, message: msg.into() }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    /// Prefixes the message with a file path.
    pub fn at(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ppcard_core::Error> for CliError {
    fn from(e: ppcard_core::Error) -> Self {
        use ppcard_core::Error as E;
        let kind = match &e {
            E::InvalidParameter(_) | E::Schema(_) => ErrorKind::Config,
            E::LengthMismatch { .. } | E::Format { .. } | E::Io(_) => ErrorKind::Data,
            E::Invariant(_) => ErrorKind::Internal,
        };
        CliError { kind, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a path to any error convertible into [`CliError`].
pub trait Context<T> {
    fn at(self, path: &Path) -> CliResult<T>;
}

impl<T, E: Into<CliError>> Context<T> for std::result::Result<T, E> {
    fn at(self, path: &Path) -> CliResult<T> {
        self.map_err(|e| e.into().at(path))
    }
}
