use serde::{Deserialize, Serialize};

use super::{EngineError, NavSet};
use crate::map::{DocIdx, KnowledgeMap};

/// Weighted Point of Interest: the fitness-weighted centre of a user's
/// positively rated links and Favorites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wpi {
    pub coord: Vec<f64>,
}

/// Weighted centroid of set entries with positive fitness (weight =
/// fitness) and Favorites (weight as given).
pub fn compute_wpi(
    set: &NavSet,
    favorites: &[(DocIdx, u32)],
    map: &KnowledgeMap,
) -> Result<Wpi, EngineError> {
    let points = set
        .entries()
        .iter()
        .filter(|e| e.fitness > 0)
        .map(|e| (e.doc, e.fitness))
        .chain(favorites.iter().copied())
        .filter(|(_, w)| *w > 0)
        .map(|(d, w)| (map.coord(d), f64::from(w)));
    weighted_centroid(points, map.dimensionality())
        .map(|coord| Wpi { coord })
        .ok_or(EngineError::NoInterestSignal)
}

/// `sum(w_i * p_i) / sum(w_i)`, or `None` when there is no positive weight.
pub fn weighted_centroid<'a>(
    points: impl IntoIterator<Item = (&'a [f64], f64)>,
    dim: usize,
) -> Option<Vec<f64>> {
    let mut acc = vec![0.0; dim];
    let mut total = 0.0;
    for (p, w) in points {
        if w <= 0.0 {
            continue;
        }
        total += w;
        for (a, x) in acc.iter_mut().zip(p) {
            *a += w * x;
        }
    }
    if total <= 0.0 {
        return None;
    }
    acc.iter_mut().for_each(|a| *a /= total);
    Some(acc)
}
