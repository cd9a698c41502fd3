use thiserror::Error;

use crate::survdata::Time;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by ingestion, estimation and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("dataset contains no observations")]
    EmptyDataset,
    #[error("invalid observation: {0}")]
    InvalidObservation(String),
    #[error("time {0} does not lie on the grid")]
    OffGrid(Time),
    #[error("inconsistent counts: {0}")]
    Consistency(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("distribution is not identified by the observation law: {0}")]
    Identifiability(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
