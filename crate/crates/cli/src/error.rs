use std::fmt;
use std::process::ExitCode;

/// Failure classes with fixed process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or parameters (exit 2).
    Usage(String),
    /// File or stream failure (exit 3).
    Io(String),
    /// Numerical or internal failure (exit 4).
    Internal(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Internal(_) => 4,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<wishart_rd::Error> for CliError {
    fn from(e: wishart_rd::Error) -> Self {
        use wishart_rd::Error as E;
        match e {
            E::Dimension { .. } | E::Domain(_) | E::Parameter(_) | E::UnknownSuite(_) => CliError::Usage(e.to_string()),
            E::NotPsd { .. } | E::NonFinite | E::Degenerate(_) => CliError::Internal(e.to_string()),
        }
    }
}
