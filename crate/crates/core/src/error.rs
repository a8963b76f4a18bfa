use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("eigensolver failed to converge for {context}")]
    Eigensolver { context: String },

    /// Too few crossing events to quote a flux. Carries the raw event count
    /// and the (unreliable) area estimate it would have produced.
    #[error("insufficient statistics: {count} crossing events (estimate {estimate:.4e})")]
    InsufficientStatistics { count: usize, estimate: f64 },

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }

    /// Process exit code for the CLI, one per error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::InvalidArgument(_) | Error::Config { .. } => 2,
            Error::NumericalDomain(_) | Error::Eigensolver { .. } => 3,
            Error::InsufficientStatistics { .. } => 4,
            Error::Io(_) => 5,
            Error::Scenario { source, .. } => source.exit_code(),
        }
    }
}
