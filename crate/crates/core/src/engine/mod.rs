//! The evolutionary engine behind each user's link Set: random
//! initialization, fitness on click, ageing, recombination toward the
//! Weighted Point of Interest, mutation, and recency suppression.

mod config;
mod history;
mod navset;
mod wpi;

pub use config::EngineConfig;
pub use history::DisplayHistory;
pub use navset::{NavSet, Regime, RenewalReport, Replacement, ReplacementKind, SetEntry};
pub use wpi::{compute_wpi, weighted_centroid, Wpi};

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::map::DocIdx;

/// The generator every engine decision draws from.
pub type EngineRng = ChaCha8Rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("document {0} is not in the set")]
    NotInSet(DocIdx),
    #[error("map has {docs} documents, the set needs {needed}")]
    MapTooSmall { docs: usize, needed: usize },
    #[error("no positive fitness and no favorites")]
    NoInterestSignal,
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
}
