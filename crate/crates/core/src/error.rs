use thiserror::Error;

/// Errors raised by estimators, learners and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric fault: {0}")]
    NumericFault(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("feature estimates are incompatible: {0}")]
    KernelMismatch(String),

    #[error("sampled index {drawn} exceeds the safety cap {cap}")]
    CapExceeded { drawn: u64, cap: u64 },

    #[error("oracle budget of {budget} queries exhausted")]
    BudgetExceeded { budget: u64 },

    #[error("round {round} is beyond the configured horizon {horizon}")]
    HorizonExceeded { round: usize, horizon: usize },

    #[error("round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("optimizer did not converge (gap estimate {gap:e})")]
    NonConvergence { gap: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::NumericFault(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at_round(self, round: usize) -> Self {
        match self {
            e @ Error::Round { .. } => e,
            e => Error::Round {
                round,
                source: Box::new(e),
            },
        }
    }
}
