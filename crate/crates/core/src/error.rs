use std::path::PathBuf;

/// Errors produced anywhere in the simulation, training and analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("scene generation failed after {attempts} attempts: {what}")]
    SceneGeneration { attempts: usize, what: String },

    #[error("degenerate channel `{component}`: constant over the dataset")]
    DegenerateChannel { component: String },

    #[error("underdetermined affine fit: {points} points for input dimension {dim}")]
    Underdetermined { points: usize, dim: usize },

    #[error("degenerate point cloud: all points coincide")]
    DegenerateCloud,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("training diverged at epoch {epoch} (loss = {loss})")]
    Diverged { epoch: u64, loss: f64 },

    #[error("unsupported schema version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("provenance mismatch: {0}")]
    Provenance(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    IoAt { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io_at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::IoAt { path, source }
    }
}
