use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the planner library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("unknown algorithm `{0}` (expected one of pso, bbo, fa, de)")]
    UnknownAlgorithm(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("could not place obstacle after {attempts} attempts")]
    Unplaceable { attempts: usize },

    #[error("remaining time budget exhausted ({remaining:.3} s)")]
    BudgetExhausted { remaining: f64 },

    #[error("failed to read map {path}: {reason}")]
    MapRead { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
