//! Experiment harness for the NMOR intensity-correlation model: run
//! configuration, magnetic-field sweeps, time traces, ingestion of recorded
//! detector traces, and CSV/JSON output.

pub mod config;
pub mod harness;
pub mod io;
pub mod validate;

pub use config::ExperimentConfig;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("at B = {b_gauss} G: {source}")]
    AtField {
        b_gauss: f64,
        #[source]
        source: nmor_core::Error,
    },
    #[error(transparent)]
    Numerical(#[from] nmor_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{path}, line {line}: time grid is not uniform")]
    NonuniformGrid { path: PathBuf, line: u64 },
}

impl HarnessError {
    /// 2 for bad input (configuration or files), 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::AtField { .. } | Self::Numerical(_) => 3,
            Self::Config(_) | Self::Io { .. } | Self::Parse { .. } | Self::NonuniformGrid { .. } => 2,
        }
    }
}
