//! Social suggestions: each user's social WPI, interest proximity between
//! users, and level-of-interest (LOI) ranking of other users' Favorites.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Seconds;
use crate::engine::weighted_centroid;
use crate::map::{euclidean, DocIdx, KnowledgeMap};
use crate::user::{HistoryRecord, UserProfile};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SocialError {
    #[error("user has no usable interest signal")]
    NoSignal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WpiSource {
    LiveFavorites,
    History,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialWpi {
    pub coord: Vec<f64>,
    pub source: WpiSource,
    pub computed_at: Seconds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub doc: DocIdx,
    pub loi: f64,
    pub contributing_users: usize,
}

/// `time_alive` relative to the user's longest-held record; 0 when every
/// record is at zero.
pub fn time_alive_modifier<'a>(
    record: &HistoryRecord,
    history: impl IntoIterator<Item = &'a HistoryRecord>,
) -> f64 {
    let max = history.into_iter().map(|r| r.time_alive).max().unwrap_or(0);
    if max == 0 {
        0.0
    } else {
        record.time_alive as f64 / max as f64
    }
}

/// Recency of a record between the user's oldest record (0) and `now` (1).
pub fn age_modifier<'a>(
    record: &HistoryRecord,
    history: impl IntoIterator<Item = &'a HistoryRecord>,
    now: Seconds,
) -> f64 {
    let t0 = history
        .into_iter()
        .map(|r| r.timestamp)
        .min()
        .unwrap_or(record.timestamp)
        .min(record.timestamp);
    if now <= t0 {
        return 1.0;
    }
    ((record.timestamp - t0) as f64 / (now - t0) as f64).clamp(0.0, 1.0)
}

/// Product of both modifiers for every record of the user.
fn record_weights(user: &UserProfile, now: Seconds) -> BTreeMap<DocIdx, f64> {
    let max_ta = user.history().map(|r| r.time_alive).max().unwrap_or(0);
    let t0 = user.history().map(|r| r.timestamp).min().unwrap_or(now);
    user.history()
        .map(|r| {
            let ta = if max_ta == 0 { 0.0 } else { r.time_alive as f64 / max_ta as f64 };
            let age = if now <= t0 {
                1.0
            } else {
                ((r.timestamp.saturating_sub(t0)) as f64 / (now - t0) as f64).clamp(0.0, 1.0)
            };
            (r.doc, ta * age)
        })
        .collect()
}

/// Live favorites, unweighted, when there are any; otherwise the history
/// weighted by `time_alive_modifier * age_modifier`.
pub fn compute_social_wpi(user: &UserProfile, map: &KnowledgeMap, now: Seconds) -> Result<SocialWpi, SocialError> {
    let dim = map.dimensionality();
    if !user.favorites().is_empty() {
        let coord = weighted_centroid(user.favorites().iter().map(|f| (map.coord(f.doc), 1.0)), dim)
            .ok_or(SocialError::NoSignal)?;
        return Ok(SocialWpi {
            coord,
            source: WpiSource::LiveFavorites,
            computed_at: now,
        });
    }
    let weights = record_weights(user, now);
    let coord = weighted_centroid(weights.iter().map(|(d, w)| (map.coord(*d), *w)), dim)
        .ok_or(SocialError::NoSignal)?;
    Ok(SocialWpi {
        coord,
        source: WpiSource::History,
        computed_at: now,
    })
}

pub fn interest_distance(a: Option<&SocialWpi>, b: Option<&SocialWpi>) -> Result<f64, SocialError> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(euclidean(&a.coord, &b.coord)),
        _ => Err(SocialError::NoSignal),
    }
}

/// `1 / (1 + distance)`. A current user without a social WPI matches every
/// other user with the neutral proximity 1; other users without one do not
/// contribute at all (`None`).
fn proximity(current: Option<&SocialWpi>, other: Option<&SocialWpi>) -> Option<f64> {
    let other = other?;
    Some(match current {
        Some(c) => 1.0 / (1.0 + euclidean(&c.coord, &other.coord)),
        None => 1.0,
    })
}

/// LOI of one document for `current`, summed over every other user that
/// has a history record for it. Returns (loi, contributing users).
pub fn compute_loi(doc: DocIdx, current: &UserProfile, users: &[UserProfile], now: Seconds) -> (f64, usize) {
    let mut loi = 0.0;
    let mut contributors = 0;
    for u in users.iter().filter(|u| u.user_id != current.user_id) {
        let Some(record) = u.history_record(doc) else {
            continue;
        };
        let Some(prox) = proximity(current.social_wpi.as_ref(), u.social_wpi.as_ref()) else {
            continue;
        };
        let c = age_modifier(record, u.history(), now) * time_alive_modifier(record, u.history()) * prox;
        if c > 0.0 {
            loi += c;
            contributors += 1;
        }
    }
    (loi, contributors)
}

/// Top `k` documents by LOI (descending, ties by document), leaving out the
/// current user's live Favorites, `exclude` (the current set) and anything
/// scoring 0.
pub fn suggestions(
    current: &UserProfile,
    k: usize,
    users: &[UserProfile],
    exclude: &[DocIdx],
    now: Seconds,
) -> Vec<Suggestion> {
    let skip: HashSet<DocIdx> = current.favorite_docs().into_iter().chain(exclude.iter().copied()).collect();
    let mut scores: BTreeMap<DocIdx, (f64, usize)> = BTreeMap::new();
    for u in users.iter().filter(|u| u.user_id != current.user_id) {
        let Some(prox) = proximity(current.social_wpi.as_ref(), u.social_wpi.as_ref()) else {
            continue;
        };
        for (doc, w) in record_weights(u, now) {
            let c = w * prox;
            if c > 0.0 && !skip.contains(&doc) {
                let s = scores.entry(doc).or_default();
                s.0 += c;
                s.1 += 1;
            }
        }
    }
    let mut ranked: Vec<Suggestion> = scores
        .into_iter()
        .map(|(doc, (loi, contributing_users))| Suggestion {
            doc,
            loi,
            contributing_users,
        })
        .collect();
    ranked.sort_by(|a, b| b.loi.total_cmp(&a.loi).then(a.doc.cmp(&b.doc)));
    ranked.truncate(k);
    ranked
}
