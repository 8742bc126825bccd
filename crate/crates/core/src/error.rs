// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the indicator engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no valid records in {0}")]
    NoValidRecords(PathBuf),
    #[error("corrupt cache file {path}: {reason}")]
    CacheCorrupt { path: PathBuf, reason: String },
    #[error("no documents available for {0}")]
    NoDocuments(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("resampling plan and graph disagree: entity {0} is missing from the graph")]
    PlanGraphMismatch(String),
    #[error("window [{lo}, {hi}] does not intersect the corpus span [{span_lo}, {span_hi}]")]
    WindowOutOfRange {
        lo: i32,
        hi: i32,
        span_lo: i32,
        span_hi: i32,
    },
    #[error("unknown document {0}")]
    UnknownDocument(String),
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("duplicate embedding id {0}")]
    DuplicateId(String),
    #[error("corpus has {found} documents, above the oracle guard of {limit}")]
    CorpusTooLarge { found: usize, limit: usize },
    #[error("no scores to report")]
    NoScores,
    #[error("score series share no documents")]
    NoOverlap,
    #[error("malformed input at {path}:{line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
