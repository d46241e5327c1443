use thiserror::Error;

/// CLI failures. Usage errors exit with status 2, runtime errors with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Runtime(_) => "runtime",
        }
    }

    /// `hers: <kind> error: <message>` on one line.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace(['\r', '\n'], " ");
        format!("hers: {} error: {}", self.kind(), msg.split_whitespace().collect::<Vec<_>>().join(" "))
    }

    /// Prefixes the message with the parameter or stage it came from.
    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{what}: {m}")),
            CliError::Runtime(m) => CliError::Runtime(format!("{what}: {m}")),
        }
    }
}

impl From<hers_core::Error> for CliError {
    fn from(e: hers_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
