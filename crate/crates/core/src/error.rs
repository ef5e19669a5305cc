use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("integration failure at t = {time:.6e} s: {reason}")]
    IntegrationFailure { time: f64, reason: String },

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("undefined period: {0}")]
    UndefinedPeriod(String),

    #[error("ill-conditioned fit: condition number {condition_number:.3e} exceeds {limit:.1e} ({detail})")]
    IllConditionedFit { condition_number: f64, limit: f64, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
