//! Batch front-end for the `emfield` solvers: a TOML run configuration goes
//! in, waveform CSVs and a JSON report come out.

pub mod config;
pub mod output;
pub mod tasks;

use thiserror::Error;

pub use config::{load_config, parse_config, ConfigError, RunConfig, Task};
pub use tasks::{run_tasks, RunOptions, RunOutcome, RunReport, TaskReport, TaskStatus, Timings};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("worker pool: {0}")]
    ThreadPool(String),
    #[error("setup: {0}")]
    Setup(String),
}
