//! Durable user profiles in an embedded transactional store.
//!
//! Profiles are stored as JSON records keyed by user id. Documents are
//! referenced by their corpus id rather than their map index, so a store
//! survives a rebuilt map; favorites of documents the map no longer holds
//! are dropped on load.

use std::path::Path;

use adaptnav_core::social::{SocialWpi, WpiSource};
use adaptnav_core::user::{FavoriteEntry, HistoryRecord, UserProfile};
use adaptnav_core::{KnowledgeMap, Seconds};
use log::warn;
use redb::{Database, ReadableDatabase, ReadableTable, TableDefinition};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

const PROFILES: TableDefinition<&str, &[u8]> = TableDefinition::new("profiles");
const META: TableDefinition<&str, u32> = TableDefinition::new("meta");
const SCHEMA_KEY: &str = "schema_version";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Db(#[from] redb::Error),
    #[error("store schema version {found}, expected {expected}")]
    SchemaMismatch { found: u32, expected: u32 },
    #[error("corrupt profile record `{id}`: {source}")]
    Corrupt {
        id: String,
        source: serde_json::Error,
    },
}

macro_rules! db_err {
    ($($t:ty),*) => {$(
        impl From<$t> for StoreError {
            fn from(e: $t) -> Self {
                Self::Db(e.into())
            }
        }
    )*};
}
db_err!(
    redb::DatabaseError,
    redb::TransactionError,
    redb::TableError,
    redb::StorageError,
    redb::CommitError
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FavoriteRecord {
    pub doc_id: String,
    pub time_alive: Seconds,
    pub added_at: Seconds,
    pub updated_at: Seconds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub doc_id: String,
    pub time_alive: Seconds,
    pub timestamp: Seconds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialWpiRecord {
    pub coord: Vec<f64>,
    pub source: WpiSource,
    pub computed_at: Seconds,
}

/// The stored (and `GET /profile`) form of a [`UserProfile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub user_id: String,
    pub created_at: Seconds,
    pub last_action_at: Seconds,
    pub dormant: bool,
    pub favorites: Vec<FavoriteRecord>,
    pub history: Vec<HistoryEntry>,
    pub social_wpi: Option<SocialWpiRecord>,
}

impl ProfileRecord {
    pub fn from_profile(p: &UserProfile, map: &KnowledgeMap) -> Self {
        let id = |doc| map.document(doc).id.clone();
        Self {
            user_id: p.user_id.clone(),
            created_at: p.created_at,
            last_action_at: p.last_action_at,
            dormant: p.dormant,
            favorites: p
                .favorites()
                .iter()
                .map(|f| FavoriteRecord {
                    doc_id: id(f.doc),
                    time_alive: f.time_alive,
                    added_at: f.added_at,
                    updated_at: f.updated_at,
                })
                .collect(),
            history: p
                .history()
                .map(|r| HistoryEntry {
                    doc_id: id(r.doc),
                    time_alive: r.time_alive,
                    timestamp: r.timestamp,
                })
                .collect(),
            social_wpi: p.social_wpi.as_ref().map(|w| SocialWpiRecord {
                coord: w.coord.clone(),
                source: w.source,
                computed_at: w.computed_at,
            }),
        }
    }

    /// Resolves document ids against `map`, dropping any it does not hold.
    pub fn into_profile(self, map: &KnowledgeMap) -> UserProfile {
        let user = self.user_id;
        let resolve = |doc_id: &str| {
            let found = map.find(doc_id);
            if found.is_none() {
                warn!("profile {user}: document `{doc_id}` is not in the map; dropping it");
            }
            found
        };
        let favorites = self
            .favorites
            .iter()
            .filter_map(|f| {
                Some(FavoriteEntry {
                    doc: resolve(&f.doc_id)?,
                    time_alive: f.time_alive,
                    added_at: f.added_at,
                    updated_at: f.updated_at,
                })
            })
            .collect();
        let history = self
            .history
            .iter()
            .filter_map(|r| {
                Some(HistoryRecord {
                    doc: resolve(&r.doc_id)?,
                    time_alive: r.time_alive,
                    timestamp: r.timestamp,
                })
            })
            .collect();
        let social_wpi = self.social_wpi.map(|w| SocialWpi {
            coord: w.coord,
            source: w.source,
            computed_at: w.computed_at,
        });
        UserProfile::from_parts(
            user.clone(),
            self.created_at,
            self.last_action_at,
            self.dormant,
            favorites,
            history,
            social_wpi,
        )
    }
}

pub struct Store {
    db: Database,
}

impl Store {
    /// Opens or creates the store at `path`, checking its schema version.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let db = Database::create(path)?;
        let txn = db.begin_write()?;
        {
            let mut meta = txn.open_table(META)?;
            let found = meta.get(SCHEMA_KEY)?.map(|v| v.value());
            match found {
                None => {
                    meta.insert(SCHEMA_KEY, SCHEMA_VERSION)?;
                }
                Some(v) if v == SCHEMA_VERSION => {}
                Some(found) => {
                    return Err(StoreError::SchemaMismatch {
                        found,
                        expected: SCHEMA_VERSION,
                    })
                }
            }
            txn.open_table(PROFILES)?;
        }
        txn.commit()?;
        Ok(Self { db })
    }

    /// Writes all `records` in one transaction.
    pub fn put_all<'a>(&self, records: impl IntoIterator<Item = &'a ProfileRecord>) -> Result<(), StoreError> {
        let txn = self.db.begin_write()?;
        {
            let mut table = txn.open_table(PROFILES)?;
            for r in records {
                let bytes = serde_json::to_vec(r).expect("profile records serialize");
                table.insert(r.user_id.as_str(), bytes.as_slice())?;
            }
        }
        txn.commit()?;
        Ok(())
    }

    pub fn put(&self, record: &ProfileRecord) -> Result<(), StoreError> {
        self.put_all([record])
    }

    pub fn get(&self, user_id: &str) -> Result<Option<ProfileRecord>, StoreError> {
        let txn = self.db.begin_read()?;
        let table = txn.open_table(PROFILES)?;
        let Some(bytes) = table.get(user_id)? else {
            return Ok(None);
        };
        decode(user_id, bytes.value()).map(Some)
    }

    pub fn contains(&self, user_id: &str) -> Result<bool, StoreError> {
        let txn = self.db.begin_read()?;
        let table = txn.open_table(PROFILES)?;
        Ok(table.get(user_id)?.is_some())
    }

    /// Every stored profile, ordered by user id.
    pub fn all(&self) -> Result<Vec<ProfileRecord>, StoreError> {
        let txn = self.db.begin_read()?;
        let table = txn.open_table(PROFILES)?;
        let mut out = Vec::new();
        for entry in table.iter()? {
            let (k, v) = entry?;
            out.push(decode(k.value(), v.value())?);
        }
        Ok(out)
    }
}

fn decode(id: &str, bytes: &[u8]) -> Result<ProfileRecord, StoreError> {
    serde_json::from_slice(bytes).map_err(|source| StoreError::Corrupt {
        id: id.to_string(),
        source,
    })
}
