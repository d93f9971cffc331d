//! Shared service state: the read-only map, the live sessions, the social
//! snapshot and the store.
//!
//! Each session sits behind its own async mutex, so requests and ticks for
//! one user are serialized while different users never wait on each other.
//! The session table itself is only locked long enough to look up or insert
//! an entry.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::{Arc, RwLock};

use adaptnav_core::session::{Action, Session, TraceEvent};
use adaptnav_core::social::{compute_social_wpi, suggestions};
use adaptnav_core::user::UserProfile;
use adaptnav_core::{Clock, KnowledgeMap, Seconds};
use log::{debug, info};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tokio::sync::Mutex;

use crate::config::ServiceConfig;
use crate::error::ApiError;
use crate::store::{ProfileRecord, Store, StoreError};
use crate::views::{DocView, FavoriteChange, FavoritesView, HealthView, SetView, SuggestionsView};

/// Live sessions idle this long are written back and dropped; the next
/// request rebuilds them from the store.
pub const IDLE_EVICT_SECS: Seconds = 3600;
/// Remembered `/click` replies per session, for idempotency keys.
const REPLAY_CACHE: usize = 256;

pub struct Slot {
    session: Session,
    persisted: UserProfile,
    clicks: VecDeque<(String, Result<SetView, ApiError>)>,
    last_request: Seconds,
}

impl Slot {
    pub fn session(&self) -> &Session {
        &self.session
    }
}

/// Outcome of a session request. `issued` is set when the request had no
/// session and a new token was created for it, in which case the cookie
/// must be sent even if the action itself failed.
#[derive(Debug)]
pub struct Reply<T> {
    pub token: String,
    pub issued: bool,
    pub result: Result<T, ApiError>,
}

pub struct App {
    map: Arc<KnowledgeMap>,
    config: ServiceConfig,
    store: Arc<Store>,
    clock: Arc<dyn Clock>,
    tokens: std::sync::Mutex<StdRng>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
    /// Every known profile as of the last social recomputation.
    social: RwLock<Arc<Vec<UserProfile>>>,
}

impl App {
    /// `token_seed` makes issued tokens (and so session seeds)
    /// reproducible; production passes `None` for OS entropy.
    pub fn new(
        map: Arc<KnowledgeMap>,
        config: ServiceConfig,
        store: Store,
        clock: Arc<dyn Clock>,
        token_seed: Option<u64>,
    ) -> Result<Arc<Self>, StoreError> {
        let users: Vec<UserProfile> = store.all()?.into_iter().map(|r| r.into_profile(&map)).collect();
        info!("loaded {} stored profiles", users.len());
        let rng = match token_seed {
            Some(s) => StdRng::seed_from_u64(s),
            None => StdRng::from_os_rng(),
        };
        Ok(Arc::new(Self {
            map,
            config,
            store: Arc::new(store),
            clock,
            tokens: std::sync::Mutex::new(rng),
            sessions: RwLock::new(HashMap::new()),
            social: RwLock::new(Arc::new(users)),
        }))
    }

    pub fn map(&self) -> &KnowledgeMap {
        &self.map
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn now(&self) -> Seconds {
        self.clock.now()
    }

    pub fn live_sessions(&self) -> usize {
        self.sessions.read().expect("session table poisoned").len()
    }

    fn issue_token(&self) -> String {
        let bits: u128 = self.tokens.lock().expect("token rng poisoned").random();
        format!("{bits:032x}")
    }

    fn session_seed(&self, token: &str) -> u64 {
        u64::from_str_radix(&token[..16], 16).expect("validated token") ^ self.config.engine.rng_seed
    }

    fn live(&self, token: &str) -> Option<Arc<Mutex<Slot>>> {
        self.sessions.read().expect("session table poisoned").get(token).cloned()
    }

    fn live_slots(&self) -> Vec<(String, Arc<Mutex<Slot>>)> {
        let table = self.sessions.read().expect("session table poisoned");
        let mut slots: Vec<_> = table.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        slots.sort_by(|a, b| a.0.cmp(&b.0));
        slots
    }

    fn open_slot(&self, profile: UserProfile, now: Seconds) -> Result<Slot, ApiError> {
        let seed = self.session_seed(&profile.user_id);
        let (session, event) = Session::start(profile.clone(), self.config.engine.clone(), &self.map, seed, now)?;
        log_events(&profile.user_id, std::slice::from_ref(&event));
        Ok(Slot {
            session,
            persisted: profile,
            clicks: VecDeque::new(),
            last_request: now,
        })
    }

    /// Finds the session for `token`, restoring it from the store or
    /// creating a new one (with a new token) when there is no token.
    async fn resolve(&self, token: Option<&str>) -> Result<(String, bool, Arc<Mutex<Slot>>), ApiError> {
        let now = self.clock.now();
        let Some(token) = token else {
            let token = self.issue_token();
            let profile = UserProfile::new(token.clone(), now);
            self.write(vec![ProfileRecord::from_profile(&profile, &self.map)]).await?;
            let slot = Arc::new(Mutex::new(self.open_slot(profile, now)?));
            self.sessions
                .write()
                .expect("session table poisoned")
                .insert(token.clone(), slot.clone());
            info!("issued session {}", short(&token));
            return Ok((token, true, slot));
        };
        if !is_token(token) {
            return Err(ApiError::BadRequest("malformed session token".into()));
        }
        if let Some(slot) = self.live(token) {
            return Ok((token.to_string(), false, slot));
        }
        let store = self.store.clone();
        let id = token.to_string();
        let record = tokio::task::spawn_blocking(move || store.get(&id))
            .await
            .map_err(|e| ApiError::Internal(e.to_string()))??
            .ok_or(ApiError::SessionExpired)?;
        let profile = record.into_profile(&self.map);
        let mut table = self.sessions.write().expect("session table poisoned");
        // another request may have restored it meanwhile
        let slot = match table.get(token) {
            Some(slot) => slot.clone(),
            None => {
                let slot = Arc::new(Mutex::new(self.open_slot(profile, now)?));
                table.insert(token.to_string(), slot.clone());
                debug!("restored session {}", short(token));
                slot
            }
        };
        Ok((token.to_string(), false, slot))
    }

    async fn write(&self, records: Vec<ProfileRecord>) -> Result<(), ApiError> {
        if records.is_empty() {
            return Ok(());
        }
        let store = self.store.clone();
        tokio::task::spawn_blocking(move || store.put_all(&records))
            .await
            .map_err(|e| ApiError::Internal(e.to_string()))??;
        Ok(())
    }

    /// Writes the slot's profile if it changed since the last write.
    async fn persist(&self, slot: &mut Slot) -> Result<(), ApiError> {
        if slot.session.profile() == &slot.persisted {
            return Ok(());
        }
        let profile = slot.session.profile().clone();
        self.write(vec![ProfileRecord::from_profile(&profile, &self.map)]).await?;
        slot.persisted = profile;
        Ok(())
    }

    /// Runs `f` on the caller's session at the current time, then writes
    /// the profile back if it changed.
    async fn with_session<T>(
        &self,
        token: Option<&str>,
        f: impl FnOnce(&mut Slot, Seconds, &KnowledgeMap) -> Result<T, ApiError>,
    ) -> Result<Reply<T>, ApiError> {
        let (token, issued, slot) = self.resolve(token).await?;
        let mut guard = slot.lock().await;
        let now = self.clock.now();
        guard.last_request = now;
        let result = f(&mut guard, now, &self.map);
        self.persist(&mut guard).await?;
        Ok(Reply { token, issued, result })
    }

    fn doc(&self, doc_id: &str) -> Result<adaptnav_core::DocIdx, ApiError> {
        self.map
            .find(doc_id)
            .ok_or_else(|| ApiError::UnknownDocument(doc_id.to_string()))
    }

    pub async fn get_set(&self, token: Option<&str>) -> Result<Reply<SetView>, ApiError> {
        self.with_session(token, |slot, now, map| {
            catch_up(slot, now, map);
            Ok(SetView::of(&slot.session, map))
        })
        .await
    }

    /// At most once per `idempotency_key`: a repeated key returns the
    /// first reply without clicking again.
    pub async fn click(
        &self,
        token: Option<&str>,
        doc_id: &str,
        idempotency_key: Option<&str>,
    ) -> Result<Reply<SetView>, ApiError> {
        let doc = self.doc(doc_id);
        self.with_session(token, |slot, now, map| {
            if let Some(key) = idempotency_key {
                if let Some((_, reply)) = slot.clicks.iter().find(|(k, _)| k == key) {
                    return reply.clone();
                }
            }
            let reply = doc
                .and_then(|doc| act(slot, &Action::Click { doc }, now, map))
                .map(|()| SetView::of(&slot.session, map));
            if let Some(key) = idempotency_key {
                if slot.clicks.len() == REPLAY_CACHE {
                    slot.clicks.pop_front();
                }
                slot.clicks.push_back((key.to_string(), reply.clone()));
            }
            reply
        })
        .await
    }

    pub async fn add_favorite(&self, token: Option<&str>, doc_id: &str) -> Result<Reply<FavoriteChange>, ApiError> {
        let doc = self.doc(doc_id);
        self.with_session(token, |slot, now, map| {
            act(slot, &Action::AddFavorite { doc: doc? }, now, map)?;
            refresh_social_wpi(slot, now, map);
            Ok(favorite_change(slot, map))
        })
        .await
    }

    pub async fn remove_favorite(&self, token: Option<&str>, doc_id: &str) -> Result<Reply<FavoriteChange>, ApiError> {
        let doc = self.doc(doc_id);
        self.with_session(token, |slot, now, map| {
            act(slot, &Action::RemoveFavorite { doc: doc? }, now, map)?;
            refresh_social_wpi(slot, now, map);
            Ok(favorite_change(slot, map))
        })
        .await
    }

    pub async fn favorites(&self, token: Option<&str>) -> Result<Reply<FavoritesView>, ApiError> {
        self.with_session(token, |slot, now, map| {
            catch_up(slot, now, map);
            Ok(FavoritesView::of(slot.session.profile(), map))
        })
        .await
    }

    /// Top-k documents by level of interest, scored against the social
    /// snapshot and leaving out the caller's favorites and current set.
    pub async fn suggestions(&self, token: Option<&str>) -> Result<Reply<SuggestionsView>, ApiError> {
        let users = self.social.read().expect("social snapshot poisoned").clone();
        let k = self.config.suggestions_k;
        self.with_session(token, |slot, now, map| {
            catch_up(slot, now, map);
            let exclude: Vec<_> = slot.session.set().docs().collect();
            let top = suggestions(slot.session.profile(), k, &users, &exclude, now);
            Ok(SuggestionsView::of(&top, map))
        })
        .await
    }

    pub async fn reset(&self, token: Option<&str>) -> Result<Reply<SetView>, ApiError> {
        self.action(token, Action::Reset).await
    }

    pub async fn pause(&self, token: Option<&str>, paused: bool) -> Result<Reply<SetView>, ApiError> {
        self.action(token, Action::Pause { paused }).await
    }

    pub async fn set_refresh_interval(&self, token: Option<&str>, secs: Seconds) -> Result<Reply<SetView>, ApiError> {
        self.action(token, Action::SetRefreshInterval { secs }).await
    }

    async fn action(&self, token: Option<&str>, action: Action) -> Result<Reply<SetView>, ApiError> {
        self.with_session(token, |slot, now, map| {
            act(slot, &action, now, map)?;
            Ok(SetView::of(&slot.session, map))
        })
        .await
    }

    /// The caller's durable state, written through before it is returned.
    pub async fn profile(&self, token: Option<&str>) -> Result<Reply<ProfileRecord>, ApiError> {
        self.with_session(token, |slot, now, map| {
            catch_up(slot, now, map);
            Ok(ProfileRecord::from_profile(slot.session.profile(), map))
        })
        .await
    }

    /// Favorites history as JSON lines.
    pub async fn history(&self, token: Option<&str>) -> Result<Reply<String>, ApiError> {
        self.with_session(token, |slot, now, map| {
            catch_up(slot, now, map);
            Ok(slot.session.profile().history_jsonl(map))
        })
        .await
    }

    pub fn document(&self, doc_id: &str) -> Result<DocView, ApiError> {
        let d = self.map.document(self.doc(doc_id)?);
        Ok(DocView {
            doc_id: d.id.clone(),
            title: d.title.clone(),
            uri: d.uri.clone(),
            body: d.body.clone(),
        })
    }

    pub fn health(&self) -> HealthView {
        HealthView {
            status: "ok".into(),
            map_format_version: self.map.format_version(),
            map_config_hash: self.map.config_hash().to_string(),
            corpus_size: self.map.size(),
            dimensionality: self.map.dimensionality(),
            clusters: self.map.n_clusters(),
            live_sessions: self.live_sessions(),
        }
    }

    /// The periodic algorithm for every live session up to now; writes back
    /// changed profiles and drops sessions idle past [`IDLE_EVICT_SECS`].
    pub async fn tick(&self) -> Result<(), ApiError> {
        let now = self.clock.now();
        for (token, slot) in self.live_slots() {
            let mut s = slot.lock().await;
            catch_up(&mut s, now, &self.map);
            self.persist(&mut s).await?;
            if now.saturating_sub(s.last_request) > IDLE_EVICT_SECS {
                self.sessions.write().expect("session table poisoned").remove(&token);
                debug!("evicted idle session {}", short(&token));
            }
        }
        Ok(())
    }

    /// Recomputes every user's social WPI and republishes the snapshot
    /// that suggestions are scored against. Returns the number of users.
    pub async fn recompute_social(&self) -> Result<usize, ApiError> {
        let now = self.clock.now();
        let store = self.store.clone();
        let stored = tokio::task::spawn_blocking(move || store.all())
            .await
            .map_err(|e| ApiError::Internal(e.to_string()))??;
        let mut users: BTreeMap<String, UserProfile> = stored
            .into_iter()
            .map(|r| (r.user_id.clone(), r.into_profile(&self.map)))
            .collect();
        for (token, slot) in self.live_slots() {
            let mut s = slot.lock().await;
            catch_up(&mut s, now, &self.map);
            refresh_social_wpi(&mut s, now, &self.map);
            self.persist(&mut s).await?;
            users.insert(token, s.session.profile().clone());
        }
        let live: Vec<String> = self.live_slots().into_iter().map(|(t, _)| t).collect();
        let mut changed = Vec::new();
        for (id, user) in users.iter_mut().filter(|(id, _)| !live.contains(id)) {
            if let Ok(w) = compute_social_wpi(user, &self.map, now) {
                if user.social_wpi.as_ref() != Some(&w) {
                    user.social_wpi = Some(w);
                    changed.push(ProfileRecord::from_profile(user, &self.map));
                    debug!("social WPI updated for {}", short(id));
                }
            }
        }
        self.write(changed).await?;
        let n = users.len();
        *self.social.write().expect("social snapshot poisoned") = Arc::new(users.into_values().collect());
        Ok(n)
    }
}

fn catch_up(slot: &mut Slot, now: Seconds, map: &KnowledgeMap) {
    let events = slot.session.advance_to(now, map);
    log_events(&slot.session.profile().user_id, &events);
}

fn act(slot: &mut Slot, action: &Action, now: Seconds, map: &KnowledgeMap) -> Result<(), ApiError> {
    let (events, result) = slot.session.apply(action, now, map);
    log_events(&slot.session.profile().user_id, &events);
    result.map_err(ApiError::from)
}

/// Keeps the previous WPI when the user has no usable signal.
fn refresh_social_wpi(slot: &mut Slot, now: Seconds, map: &KnowledgeMap) {
    if let Ok(w) = compute_social_wpi(slot.session.profile(), map, now) {
        slot.session.profile_mut().social_wpi = Some(w);
    }
}

fn favorite_change(slot: &Slot, map: &KnowledgeMap) -> FavoriteChange {
    FavoriteChange {
        favorites: FavoritesView::of(slot.session.profile(), map).favorites,
        set: SetView::of(&slot.session, map),
    }
}

fn log_events(user: &str, events: &[TraceEvent]) {
    if log::log_enabled!(log::Level::Debug) {
        for e in events {
            debug!("{} {}", short(user), serde_json::to_string(e).unwrap_or_default());
        }
    }
}

fn short(token: &str) -> &str {
    &token[..token.len().min(8)]
}

/// 128 bits as 32 lowercase hex digits.
pub fn is_token(s: &str) -> bool {
    s.len() == 32 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}
