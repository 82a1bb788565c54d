use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    ConfigLine { path: String, line: usize, msg: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("lp solver failure: {0}")]
    Solver(String),

    #[error("simulation aborted at hour {}: {}", .0.hour, .0.reason)]
    Aborted(Box<crate::sim::AbortReport>),

    #[error("tuning stopped: {reason}")]
    Tuning { reason: String, trace: Box<crate::bo::BoTrace> },

    #[error("point outside domain: {0}")]
    Domain(String),

    #[error("objective failure: {0}")]
    Objective(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
