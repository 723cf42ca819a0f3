use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration too large: {expected:.3e} expected points exceeds the limit of {limit:.0e}")]
    ConfigurationTooLarge { expected: f64, limit: f64 },

    #[error("too few points: need at least {needed}, got {have}")]
    TooFewPoints { needed: usize, have: usize },

    #[error("degenerate functional: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient signal: {usable} usable points, need at least {needed}")]
    InsufficientSignal { usable: usize, needed: usize },

    #[error("non-finite estimate in {0}")]
    NonFinite(String),

    #[error("empty sample")]
    EmptySample,

    #[error("unknown functional `{0}`")]
    UnknownFunctional(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
