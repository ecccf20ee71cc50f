use std::fmt;

/// What the binary reports on stderr; the variant picks the exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or inputs out of range (exit 2).
    Config(String),
    /// An internal check did not pass (exit 1).
    Check(String),
    /// A computation failed (exit 1).
    Compute(cuspvariance::Error),
    Io(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Check(_) => "check",
            CliError::Compute(_) => "compute",
            CliError::Io(_) => "io",
        }
    }

    /// One line, `key=value` fields, message quoted with `{:?}`.
    pub fn machine_line(&self) -> String {
        format!("error kind={} code={} msg={:?}", self.kind(), self.exit_code(), self.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Check(m) | CliError::Io(m) => f.write_str(m),
            CliError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cuspvariance::Error> for CliError {
    fn from(e: cuspvariance::Error) -> Self {
        match e {
            cuspvariance::Error::InvalidArgument(m) | cuspvariance::Error::Precondition(m) => CliError::Config(m),
            cuspvariance::Error::Io(m) => CliError::Io(m),
            cuspvariance::Error::MaassFormat(m) => CliError::Config(format!("maass data: {m}")),
            e @ cuspvariance::Error::MaassHecke { .. } => CliError::Check(e.to_string()),
            other => CliError::Compute(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
