use std::fmt;

/// Errors mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed invocation (exit 1).
    Usage(String),
    /// Rejected input (exit 2).
    Validation(String),
    /// Floating-point limits reached (exit 3).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<statmean_core::Error> for CliError {
    fn from(e: statmean_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}
