use std::path::PathBuf;

use crate::raster::CellIndex;
use crate::unsteady::FlowState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    Header(String),

    #[error("token count mismatch: expected {expected}, found {found}")]
    TokenCount { expected: usize, found: usize },

    #[error("non-numeric token {token:?} at position {position}")]
    Token { token: String, position: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty extent")]
    EmptyExtent,

    #[error("grid is entirely nodata")]
    AllNodata,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cell ({}, {}) has no lower neighbour and is not on the boundary", .0.row, .0.col)]
    Undrained(CellIndex),

    #[error("flow-direction cycle through {} cells starting at ({}, {})", .0.len(), .0[0].row, .0[0].col)]
    Cycle(Vec<CellIndex>),

    #[error("coarse network does not overlap the fine grid extent")]
    NoOverlap,

    #[error("region {0}: no overlapping cells")]
    NoOverlappingCells(String),

    #[error("region {0}: zero valid cells")]
    ZeroValidCells(String),

    #[error("invalid region: {0}")]
    Region(String),

    #[error("geometry lies outside the grid extent")]
    OutsideExtent,

    #[error("simulation unstable at t = {t} s: {reason}")]
    Unstable {
        t: f64,
        reason: String,
        state: Box<FlowState>,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
