//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("non-finite gradient rejected: {0}")]
    NonFiniteGradient(String),

    #[error("image dimensions {0}x{1} do not match {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),

    #[error("mesh is not closed: {0}")]
    OpenMesh(String),

    #[error("bad file format in {path}: {reason}")]
    BadFormat { path: PathBuf, reason: String },

    #[error("optimization diverged at iteration {iteration}: {details}")]
    Diverged { iteration: usize, details: String },

    #[error("stale mean surface: field generation {field} vs mesh generation {mesh}")]
    StaleMeanSurface { field: u64, mesh: u64 },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
