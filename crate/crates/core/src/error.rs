use thiserror::Error;

/// Errors raised by space, order, solver and CLI operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A point does not belong to the carrier of the space it was used with.
    #[error("point {point} is outside the carrier {carrier}")]
    Domain { point: String, carrier: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unknown catalog id `{0}`")]
    Lookup(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
