//! Command-line laboratory around `bethe-core`: TOML experiment configs,
//! deterministic JSON/CSV reports, matrix exports and a run manifest.

pub mod config;
pub mod experiments;
pub mod output;
pub mod runner;

use std::path::PathBuf;

pub use config::{validate, ConfigError, ExperimentConfig, ExperimentKind, OutputFormat};
pub use experiments::{execute, Check, ExperimentOutput, Report};
pub use runner::{run, RunManifest, RunOptions};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid config: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Config(Vec<ConfigError>),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] bethe_core::Error),

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for config and IO problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Io { .. } => 2,
            _ => 1,
        }
    }
}

/// Read and validate a config file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    validate(&text).map_err(LabError::Config)
}
