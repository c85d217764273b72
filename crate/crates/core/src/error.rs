use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("configuration is not normalizable: {0}")]
    NonNormalizable(String),

    #[error("singular value: {0}")]
    Singular(String),

    #[error("formula `{formula}` is not admissible for this scenario: {reason}")]
    Inadmissible { formula: String, reason: String },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("simulation consistency fault at t={time}: {detail}")]
    Consistency { time: f64, detail: String },

    #[error("coupling violated at t={time}: {detail}\n--- recent events ---\n{trace}")]
    Coupling {
        time: f64,
        detail: String,
        trace: String,
    },

    #[error("config error in {path}: {source}")]
    Config {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
