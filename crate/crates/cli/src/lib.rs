//! Library side of the `thermowatch` binary, so every subcommand can also be
//! driven in-process.

pub mod args;
pub mod client;
pub mod detect;
pub mod query;
pub mod serve;
pub mod simulate;

use std::fmt;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    /// I/O or other runtime failure.
    Failure = 1,
    /// Bad flags, unreadable or invalid scenario, masks or ranges.
    Config = 2,
    /// Detection finished but some tables were spooled instead of delivered.
    PartialDelivery = 3,
    /// The server could not be reached, refused a request, or failed to start.
    Server = 4,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl fmt::Display) -> Self {
        Self { exit: Exit::Config, message: message.to_string() }
    }

    pub fn server(message: impl fmt::Display) -> Self {
        Self { exit: Exit::Server, message: message.to_string() }
    }

    pub fn failure(message: impl fmt::Display) -> Self {
        Self { exit: Exit::Failure, message: message.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Wraps an I/O error with the path it concerns.
pub(crate) fn io_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::failure(format!("{}: {e}", path.display()))
}
