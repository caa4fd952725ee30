use std::path::PathBuf;

use crate::mesh::ConformityReport;

/// Errors surfaced by the adaptation library.
#[derive(Debug, thiserror::Error)]
pub enum AdaptError {
    #[error("element {element} references vertex {vertex} but the mesh has {vertex_count} vertices")]
    VertexOutOfRange {
        element: usize,
        vertex: u32,
        vertex_count: usize,
    },

    #[error("element {element} is inverted or degenerate (signed area {area:e})")]
    InvertedElement { element: usize, area: f64 },

    #[error("mesh is non-conforming after {phase}: {report}")]
    NonConforming {
        phase: &'static str,
        report: ConformityReport,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("graph colouring did not converge after {rounds} conflict-resolution rounds")]
    ColouringDiverged { rounds: usize },

    #[error("failed to start thread team: {0}")]
    ThreadPool(String),
}

impl AdaptError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AdaptError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = AdaptError> = std::result::Result<T, E>;
