use std::fmt;

use pdc_core::Error;

/// Failure of a command, carrying its exit code class.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::Format { .. } => CliError::Io(e.to_string()),
            Error::Invalid(_) => CliError::Config(e.to_string()),
            Error::NoConvergence { ref trace, .. } | Error::Fit { ref trace, .. } => {
                let tail: Vec<String> = trace.iter().rev().take(5).rev().map(|x| format!("{x:.6e}")).collect();
                CliError::Numerical(format!("{e} (trace tail: [{}])", tail.join(", ")))
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
