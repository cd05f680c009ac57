//! Command-line companion to the `compdiff` engine.
//!
//! Everything IO-shaped lives here: JSON run configuration, the
//! triple-junction initial condition, snapshot and raster writers (PPM and
//! CSV), the simulation driver with per-step diagnostics, and the temporal
//! convergence harness. The `compdiff` binary is a thin clap wrapper over
//! these modules.

pub mod config;
pub mod convergence;
pub mod ic;
pub mod io;
pub mod sim;

use compdiff::mesh::MeshError;
use compdiff::model::ModelError;
use compdiff::stability::StabilityError;
use compdiff::stepper::StepError;

/// Top-level error: every variant renders as `<category>: <detail>` on a
/// single line, which the binary prefixes with `error: `.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("solver: step {step} (t = {t}): {source}")]
    Step {
        step: usize,
        t: f64,
        #[source]
        source: StepError,
    },
    #[error("stability: {0}")]
    Stability(#[from] StabilityError),
    #[error("engine: {0}")]
    Engine(String),
    #[error("usage: {0}")]
    Usage(String),
}

impl AppError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        AppError::Io { path: path.display().to_string(), source }
    }
}
