use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("FCIDUMP line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unsupported reference: {0}")]
    UnsupportedReference(String),

    #[error("degenerate denominator {value:.3e} at {location}")]
    Degenerate { location: String, value: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("no convergence: {0}")]
    NotConverged(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
