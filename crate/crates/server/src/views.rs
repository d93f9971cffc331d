//! JSON payloads returned by the HTTP surface.

use adaptnav_core::session::Session;
use adaptnav_core::social::Suggestion;
use adaptnav_core::user::UserProfile;
use adaptnav_core::{KnowledgeMap, Seconds};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryView {
    pub doc_id: String,
    pub title: String,
    pub uri: String,
    pub fitness: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetView {
    pub iteration: u64,
    pub paused: bool,
    pub refresh_interval: Seconds,
    pub seconds_to_refresh: Seconds,
    pub entries: Vec<EntryView>,
}

impl SetView {
    pub fn of(session: &Session, map: &KnowledgeMap) -> Self {
        let set = session.set();
        Self {
            iteration: set.iteration(),
            paused: set.is_paused(),
            refresh_interval: session.refresh_interval(),
            seconds_to_refresh: session.seconds_to_refresh(),
            entries: set
                .entries()
                .iter()
                .map(|e| {
                    let d = map.document(e.doc);
                    EntryView {
                        doc_id: d.id.clone(),
                        title: d.title.clone(),
                        uri: d.uri.clone(),
                        fitness: e.fitness,
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FavoriteView {
    pub doc_id: String,
    pub title: String,
    pub time_alive: Seconds,
    pub added_at: Seconds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FavoritesView {
    pub favorites: Vec<FavoriteView>,
}

impl FavoritesView {
    pub fn of(profile: &UserProfile, map: &KnowledgeMap) -> Self {
        Self {
            favorites: profile
                .favorites()
                .iter()
                .map(|f| {
                    let d = map.document(f.doc);
                    FavoriteView {
                        doc_id: d.id.clone(),
                        title: d.title.clone(),
                        time_alive: f.time_alive,
                        added_at: f.added_at,
                    }
                })
                .collect(),
        }
    }
}

/// Reply to adding or removing a favorite: both lists may have changed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FavoriteChange {
    pub favorites: Vec<FavoriteView>,
    pub set: SetView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionView {
    pub doc_id: String,
    pub title: String,
    pub loi: f64,
    pub contributing_users: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionsView {
    pub suggestions: Vec<SuggestionView>,
}

impl SuggestionsView {
    pub fn of(suggestions: &[Suggestion], map: &KnowledgeMap) -> Self {
        Self {
            suggestions: suggestions
                .iter()
                .map(|s| {
                    let d = map.document(s.doc);
                    SuggestionView {
                        doc_id: d.id.clone(),
                        title: d.title.clone(),
                        loi: s.loi,
                        contributing_users: s.contributing_users,
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocView {
    pub doc_id: String,
    pub title: String,
    pub uri: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthView {
    pub status: String,
    pub map_format_version: u32,
    pub map_config_hash: String,
    pub corpus_size: usize,
    pub dimensionality: usize,
    pub clusters: usize,
    pub live_sessions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorView {
    pub error: String,
    pub message: String,
}
