use thiserror::Error;

/// Errors raised by the k-cut toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KcutError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative or quadrature routine failed to reach its tolerance.
    #[error("numeric error: {message} (achieved bound {bound:e})")]
    Numeric { message: String, bound: f64 },
    /// A configuration or size cap was violated.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl KcutError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        KcutError::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, bound: f64) -> Self {
        KcutError::Numeric {
            message: msg.into(),
            bound,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        KcutError::Config(msg.into())
    }

    /// Prefix the message with where the failure happened.
    pub fn context(self, ctx: &str) -> Self {
        match self {
            KcutError::Domain(m) => KcutError::Domain(format!("{ctx}: {m}")),
            KcutError::Numeric { message, bound } => KcutError::Numeric { message: format!("{ctx}: {message}"), bound },
            KcutError::Config(m) => KcutError::Config(format!("{ctx}: {m}")),
            KcutError::Io(m) => KcutError::Io(format!("{ctx}: {m}")),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            KcutError::Numeric { .. } => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for KcutError {
    fn from(e: std::io::Error) -> Self {
        KcutError::Io(e.to_string())
    }
}

impl From<csv::Error> for KcutError {
    fn from(e: csv::Error) -> Self {
        KcutError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for KcutError {
    fn from(e: serde_json::Error) -> Self {
        KcutError::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, KcutError>;
