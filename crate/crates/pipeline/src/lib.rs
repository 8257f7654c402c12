//! Filesystem and CLI layer over `fundus-core`: image IO, CSV wire formats,
//! model checkpoints, configuration, and the pipeline commands themselves.

pub mod checkpoint;
pub mod cmd;
pub mod config;
pub mod csvio;
pub mod error;
pub mod features;
pub mod pngio;
pub mod util;

pub use config::RunConfig;
pub use error::{PipelineError, Result};

/// Shared state every command receives: the resolved configuration, the raw
/// global seed override (for stages with no config-file seed), and the
/// worker pool.
pub struct Ctx {
    pub config: RunConfig,
    pub seed: Option<u64>,
    pub pool: rayon::ThreadPool,
}
