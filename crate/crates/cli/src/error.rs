use std::fmt;

/// CLI failure with a stable exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Io(String),
    Numeric(specpool::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Io(_) => 4,
            CliError::Numeric(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Numeric(_) => "numeric",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Io(m) => m.clone(),
            CliError::Numeric(e) => e.to_string(),
        };
        // one line, machine parsable
        write!(f, "error[{}]: {}", self.kind(), msg.replace('\n', " "))
    }
}

impl std::error::Error for CliError {}

impl From<specpool::Error> for CliError {
    fn from(e: specpool::Error) -> Self {
        CliError::Numeric(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
