use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("ingestion failed for {path}: {message}")]
    Ingest { path: PathBuf, message: String },

    #[error("graph format error: {0}")]
    Format(String),

    #[error("empty graph: {0}")]
    EmptyGraph(String),

    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("node index {index} out of range for graph with {node_count} nodes")]
    NodeIndex { index: usize, node_count: usize },

    #[error("graph generation failed: {0}")]
    Generation(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("transport solver failed: {0}")]
    Solver(String),

    #[error("{0}")]
    Mode(String),

    #[error("pipeline error in graph {graph_id}: {message}")]
    Pipeline { graph_id: usize, message: String },

    #[error("unknown feature '{0}'")]
    UnknownFeature(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures originating in numerical routines (convergence,
    /// solver breakdown, degenerate input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Convergence(_) | Error::Solver(_) | Error::DegenerateGraph(_)
        )
    }

    /// True for failures raised while reading input data.
    pub fn is_ingest(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Ingest { .. }
                | Error::Format(_)
                | Error::EmptyGraph(_)
                | Error::Io(_)
        )
    }
}
