//! CLI-level error taxonomy mapped onto process exit codes.

use std::fmt;

/// Failure modes of a scenario run.
///
/// Exit codes: 0 success, 1 failed verification or I/O, 2 malformed
/// configuration, 3 numerical failure (NaN) at runtime.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparsable, or semantically invalid configuration.
    Config(String),
    /// A verification suite measured a residual above its tolerance.
    Verification(String),
    /// NaN or divergence during evolution.
    Numerical(String),
    /// Filesystem trouble while writing artifacts.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) | CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<covlin_core::Error> for CliError {
    fn from(e: covlin_core::Error) -> Self {
        match e {
            covlin_core::Error::NumericalFailure { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
