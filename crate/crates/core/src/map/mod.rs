//! The Knowledge Map: PCA-compressed document coordinates, Euclidean
//! relevance, and the cluster partition that seeds each navigation slot.

mod build;
mod kmeans;
mod knowledge;
mod pca;

pub use build::{build_map, BuildConfig, BuildReport, DimensionChoice, DEFAULT_VARIANCE_THRESHOLD};
pub use kmeans::{kmeans, squared_distance, Clustering, MAX_ITERATIONS as KMEANS_MAX_ITERATIONS, RESTARTS as KMEANS_RESTARTS};
pub use knowledge::{euclidean, KnowledgeMap, MapDocument, Placement, MAP_FORMAT_VERSION};
pub use pca::{estimate_intrinsic_dimensionality, fit_pca, Pca, Projection};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::TextError;

/// Position of a document in the map. Documents are stored sorted by id,
/// so ordering by index is ordering by id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocIdx(pub u32);

impl DocIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for DocIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Cluster number, `0..k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub u32);

impl ClusterId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("fewer than two distinct vectors")]
    DegenerateInput,
    #[error("target dimension {requested} outside 1..={max}")]
    InvalidDimension { requested: usize, max: usize },
    #[error("vector has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown document `{0}`")]
    UnknownDocument(String),
    #[error("every document is excluded")]
    NoCandidates,
    #[error("cluster {0:?} has no eligible documents")]
    EmptyCluster(ClusterId),
    #[error("cannot form {k} clusters from {docs} documents")]
    TooFewDocuments { docs: usize, k: usize },
    #[error("corpus has {docs} documents, need at least {needed}")]
    MapTooSmall { docs: usize, needed: usize },
    #[error("unsupported map format version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed map file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
