//! Per-user state that outlives a navigation session: identity, Favorites
//! with `time_alive` accounting, the Favorites history, and dormancy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Seconds;
use crate::engine::NavSet;
use crate::map::{DocIdx, KnowledgeMap};
use crate::social::SocialWpi;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UserError {
    #[error("document {0} is already a favorite")]
    AlreadyFavorite(DocIdx),
    #[error("document {0} is not a favorite")]
    NotAFavorite(DocIdx),
    #[error("document {0} is not in the map")]
    UnknownDocument(DocIdx),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FavoriteEntry {
    pub doc: DocIdx,
    /// Seconds held while the user was active.
    pub time_alive: Seconds,
    pub added_at: Seconds,
    pub updated_at: Seconds,
}

/// One per (user, document) ever favorited; survives removal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub doc: DocIdx,
    pub time_alive: Seconds,
    /// Last time `time_alive` accrued (or the record was created).
    pub timestamp: Seconds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub created_at: Seconds,
    pub last_action_at: Seconds,
    pub dormant: bool,
    favorites: Vec<FavoriteEntry>,
    history: BTreeMap<DocIdx, HistoryRecord>,
    pub social_wpi: Option<SocialWpi>,
}

impl UserProfile {
    pub fn new(user_id: impl Into<String>, now: Seconds) -> Self {
        Self {
            user_id: user_id.into(),
            created_at: now,
            last_action_at: now,
            dormant: false,
            favorites: Vec::new(),
            history: BTreeMap::new(),
            social_wpi: None,
        }
    }

    /// Rebuilds a profile from stored parts.
    pub fn from_parts(
        user_id: String,
        created_at: Seconds,
        last_action_at: Seconds,
        dormant: bool,
        favorites: Vec<FavoriteEntry>,
        history: Vec<HistoryRecord>,
        social_wpi: Option<SocialWpi>,
    ) -> Self {
        Self {
            user_id,
            created_at,
            last_action_at,
            dormant,
            favorites,
            history: history.into_iter().map(|r| (r.doc, r)).collect(),
            social_wpi,
        }
    }

    pub fn favorites(&self) -> &[FavoriteEntry] {
        &self.favorites
    }

    pub fn favorite_docs(&self) -> Vec<DocIdx> {
        self.favorites.iter().map(|f| f.doc).collect()
    }

    pub fn is_favorite(&self, doc: DocIdx) -> bool {
        self.favorites.iter().any(|f| f.doc == doc)
    }

    pub fn history(&self) -> impl Iterator<Item = &HistoryRecord> {
        self.history.values()
    }

    pub fn history_record(&self, doc: DocIdx) -> Option<&HistoryRecord> {
        self.history.get(&doc)
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    /// Registers a user action.
    pub fn touch(&mut self, now: Seconds) {
        self.last_action_at = self.last_action_at.max(now);
        self.dormant = false;
    }

    pub fn add_favorite(&mut self, doc: DocIdx, map: &KnowledgeMap, now: Seconds) -> Result<(), UserError> {
        if !map.contains(doc) {
            return Err(UserError::UnknownDocument(doc));
        }
        if self.is_favorite(doc) {
            return Err(UserError::AlreadyFavorite(doc));
        }
        self.touch(now);
        self.favorites.push(FavoriteEntry {
            doc,
            time_alive: 0,
            added_at: now,
            updated_at: now,
        });
        self.history
            .entry(doc)
            .and_modify(|r| r.timestamp = now)
            .or_insert(HistoryRecord {
                doc,
                time_alive: 0,
                timestamp: now,
            });
        Ok(())
    }

    /// Drops the live entry; the history record keeps its totals.
    pub fn remove_favorite(&mut self, doc: DocIdx, now: Seconds) -> Result<(), UserError> {
        let pos = self
            .favorites
            .iter()
            .position(|f| f.doc == doc)
            .ok_or(UserError::NotAFavorite(doc))?;
        self.touch(now);
        self.favorites.remove(pos);
        Ok(())
    }

    /// Periodic Favorites accounting. While active, every favorite (and its
    /// history record) accrues `elapsed`. On the first tick that finds the
    /// user idle for more than `dormant_count` seconds, the user turns
    /// dormant and every favorite loses `dormant_count` seconds, floored at
    /// zero; accrual then stops until the next action.
    ///
    /// Returns the penalties `(doc, before, after)` when dormancy began on
    /// this tick.
    pub fn tick_favorites(
        &mut self,
        elapsed: Seconds,
        now: Seconds,
        dormant_count: Seconds,
    ) -> Option<Vec<(DocIdx, Seconds, Seconds)>> {
        if self.dormant {
            return None;
        }
        if now.saturating_sub(self.last_action_at) > dormant_count {
            self.dormant = true;
            let mut penalties = Vec::with_capacity(self.favorites.len());
            for f in &mut self.favorites {
                let before = f.time_alive;
                f.time_alive = before.saturating_sub(dormant_count);
                f.updated_at = now;
                if let Some(r) = self.history.get_mut(&f.doc) {
                    r.time_alive = r.time_alive.saturating_sub(before - f.time_alive);
                }
                penalties.push((f.doc, before, f.time_alive));
            }
            return Some(penalties);
        }
        for f in &mut self.favorites {
            f.time_alive += elapsed;
            f.updated_at = now;
            let r = self.history.entry(f.doc).or_insert(HistoryRecord {
                doc: f.doc,
                time_alive: 0,
                timestamp: now,
            });
            r.time_alive += elapsed;
            r.timestamp = now;
        }
        None
    }

    /// The Favorites history as JSON lines, one record per line.
    pub fn history_jsonl(&self, map: &KnowledgeMap) -> String {
        let mut out = String::new();
        for r in self.history.values() {
            let line = serde_json::json!({
                "user_id": self.user_id,
                "doc_id": map.document(r.doc).id,
                "time_alive": r.time_alive,
                "timestamp": r.timestamp,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

/// Weight of each favorite in the WPI: the larger of the configured
/// constant and twice the best fitness in the set (0 for an empty set).
pub fn effective_favorites_fitness(favorites_fitness_const: u32, set: &NavSet) -> u32 {
    favorites_fitness_const.max(set.max_fitness().saturating_mul(2))
}
