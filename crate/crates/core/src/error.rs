use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("pole of the gamma function at {0}")]
    Pole(f64),

    #[error("s = {0} lies outside the strip of analyticity Re s > -1")]
    OutOfStrip(f64),

    #[error("requested precision not reached: {what} (achieved {achieved:e})")]
    Precision { what: String, achieved: f64 },

    #[error("maximum search failed: {0}")]
    SearchFailure(String),

    #[error("degenerate statistics: {0}")]
    DegenerateStatistics(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
