//! Experiment harness: configuration, certificates, the separation run,
//! privacy audits and parameter sweeps.

pub mod audit;
pub mod certify;
pub mod config;
pub mod output;
pub mod separation;
pub mod sweep;

pub use config::{ExperimentConfig, Learner, Overrides, Resolved};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] sqsep_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// `2` for a rejected config, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

/// Version string embedded in every output.
pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));
