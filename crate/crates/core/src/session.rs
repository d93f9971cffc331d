//! One user's live navigation session: the periodic algorithm (favorites
//! accounting, renewal, ageing) and the user-action algorithm, serialized
//! on a single timeline and recorded as a trace.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Seconds;
use crate::engine::{
    DisplayHistory, EngineConfig, EngineError, EngineRng, NavSet, RenewalReport, Replacement, SetEntry,
};
use crate::map::{DocIdx, KnowledgeMap};
use crate::user::{UserError, UserProfile};

/// Longest refresh interval a user may choose.
pub const MAX_REFRESH_INTERVAL: Seconds = 3600;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    User(#[from] UserError),
    #[error("refresh interval {secs}s outside {min}..={max}")]
    InvalidRefreshInterval { secs: Seconds, min: Seconds, max: Seconds },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Click { doc: DocIdx },
    AddFavorite { doc: DocIdx },
    RemoveFavorite { doc: DocIdx },
    Reset,
    Pause { paused: bool },
    SetRefreshInterval { secs: Seconds },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Change<T> {
    pub doc: DocIdx,
    pub before: T,
    pub after: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    SetInitialized {
        t: Seconds,
        iteration: u64,
        entries: Vec<SetEntry>,
        /// Built around a stored interest point rather than at random.
        near_interest: bool,
    },
    Click {
        t: Seconds,
        doc: DocIdx,
        before: u32,
        after: u32,
    },
    Aged {
        t: Seconds,
        changes: Vec<Change<u32>>,
    },
    Renewal {
        t: Seconds,
        #[serde(flatten)]
        report: RenewalReport,
    },
    DormancyOnset {
        t: Seconds,
        penalties: Vec<Change<Seconds>>,
    },
    FavoriteAdded {
        t: Seconds,
        doc: DocIdx,
        evicted: Option<Replacement>,
    },
    FavoriteRemoved {
        t: Seconds,
        doc: DocIdx,
    },
    Reset {
        t: Seconds,
        iteration: u64,
        entries: Vec<SetEntry>,
    },
    Paused {
        t: Seconds,
        paused: bool,
    },
    RefreshIntervalSet {
        t: Seconds,
        secs: Seconds,
    },
    /// An action that failed validation; it still counts as activity.
    Rejected {
        t: Seconds,
        reason: String,
    },
}

impl TraceEvent {
    pub fn time(&self) -> Seconds {
        match self {
            Self::SetInitialized { t, .. }
            | Self::Click { t, .. }
            | Self::Aged { t, .. }
            | Self::Renewal { t, .. }
            | Self::DormancyOnset { t, .. }
            | Self::FavoriteAdded { t, .. }
            | Self::FavoriteRemoved { t, .. }
            | Self::Reset { t, .. }
            | Self::Paused { t, .. }
            | Self::RefreshIntervalSet { t, .. }
            | Self::Rejected { t, .. } => *t,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    config: EngineConfig,
    profile: UserProfile,
    set: NavSet,
    history: DisplayHistory,
    rng: EngineRng,
    refresh_interval: Seconds,
    renewal_countdown: Seconds,
    ageing_countdown: Seconds,
    now: Seconds,
}

impl Session {
    /// Opens a session for `profile` at `now`. A profile with a stored
    /// social WPI of the right dimension starts from the documents nearest
    /// to it; anyone else starts from a random set.
    pub fn start(
        profile: UserProfile,
        config: EngineConfig,
        map: &KnowledgeMap,
        seed: u64,
        now: Seconds,
    ) -> Result<(Self, TraceEvent), SessionError> {
        config.validate()?;
        let mut rng = EngineRng::seed_from_u64(seed);
        let mut history = DisplayHistory::new(config.history_recent_iterations);
        let favorites = profile.favorite_docs();
        let stored = profile
            .social_wpi
            .as_ref()
            .filter(|w| w.coord.len() == map.dimensionality());
        let set = match stored {
            Some(w) => NavSet::init_near(map, &config, &w.coord, &favorites, &mut history)?,
            None => NavSet::init(map, &config, &favorites, &mut history, &mut rng)?,
        };
        let event = TraceEvent::SetInitialized {
            t: now,
            iteration: set.iteration(),
            entries: set.entries().to_vec(),
            near_interest: stored.is_some(),
        };
        let session = Self {
            refresh_interval: config.refresh_interval,
            renewal_countdown: config.refresh_interval,
            ageing_countdown: config.ageing_interval,
            config,
            profile,
            set,
            history,
            rng,
            now,
        };
        Ok((session, event))
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn profile(&self) -> &UserProfile {
        &self.profile
    }

    pub fn profile_mut(&mut self) -> &mut UserProfile {
        &mut self.profile
    }

    pub fn into_profile(self) -> UserProfile {
        self.profile
    }

    pub fn set(&self) -> &NavSet {
        &self.set
    }

    pub fn display_history(&self) -> &DisplayHistory {
        &self.history
    }

    pub fn now(&self) -> Seconds {
        self.now
    }

    pub fn refresh_interval(&self) -> Seconds {
        self.refresh_interval
    }

    /// Seconds until the next renewal; frozen while paused.
    pub fn seconds_to_refresh(&self) -> Seconds {
        self.renewal_countdown
    }

    /// Runs the periodic algorithm for every whole second in
    /// `(self.now, t]`.
    pub fn advance_to(&mut self, t: Seconds, map: &KnowledgeMap) -> Vec<TraceEvent> {
        let mut events = Vec::new();
        while self.now < t {
            self.now += 1;
            self.step(map, &mut events);
        }
        events
    }

    fn step(&mut self, map: &KnowledgeMap, events: &mut Vec<TraceEvent>) {
        let t = self.now;
        if let Some(p) = self.profile.tick_favorites(1, t, self.config.dormant_count) {
            events.push(TraceEvent::DormancyOnset {
                t,
                penalties: p
                    .into_iter()
                    .map(|(doc, before, after)| Change { doc, before, after })
                    .collect(),
            });
        }
        if self.set.is_paused() {
            return;
        }
        self.renewal_countdown -= 1;
        if self.renewal_countdown == 0 {
            self.renewal_countdown = self.refresh_interval;
            let favorites = self.profile.favorite_docs();
            if let Some(report) = self
                .set
                .renew(map, &self.config, &favorites, &mut self.history, &mut self.rng)
            {
                events.push(TraceEvent::Renewal { t, report });
            }
        }
        self.ageing_countdown -= 1;
        if self.ageing_countdown == 0 {
            self.ageing_countdown = self.config.ageing_interval;
            let changes: Vec<_> = self
                .set
                .age()
                .into_iter()
                .map(|(doc, before, after)| Change { doc, before, after })
                .collect();
            if !changes.is_empty() {
                events.push(TraceEvent::Aged { t, changes });
            }
        }
    }

    /// Catches up to `now`, registers the action as user activity, then
    /// applies it. Returns every event produced, including the catch-up.
    pub fn apply(
        &mut self,
        action: &Action,
        now: Seconds,
        map: &KnowledgeMap,
    ) -> (Vec<TraceEvent>, Result<(), SessionError>) {
        let mut events = self.advance_to(now, map);
        let t = self.now;
        self.profile.touch(t);
        let result = self.dispatch(action, t, map);
        match &result {
            Ok(e) => events.push(e.clone()),
            Err(err) => events.push(TraceEvent::Rejected {
                t,
                reason: err.to_string(),
            }),
        }
        (events, result.map(|_| ()))
    }

    fn dispatch(&mut self, action: &Action, t: Seconds, map: &KnowledgeMap) -> Result<TraceEvent, SessionError> {
        Ok(match *action {
            Action::Click { doc } => {
                let (before, after) = self.set.register_click(doc, &self.config)?;
                TraceEvent::Click { t, doc, before, after }
            }
            Action::AddFavorite { doc } => {
                self.profile.add_favorite(doc, map, t)?;
                let favorites = self.profile.favorite_docs();
                let evicted = self
                    .set
                    .evict(doc, map, &favorites, &mut self.history, &mut self.rng);
                TraceEvent::FavoriteAdded { t, doc, evicted }
            }
            Action::RemoveFavorite { doc } => {
                self.profile.remove_favorite(doc, t)?;
                TraceEvent::FavoriteRemoved { t, doc }
            }
            Action::Reset => {
                let favorites = self.profile.favorite_docs();
                self.set
                    .reset(map, &self.config, &favorites, &mut self.history, &mut self.rng)?;
                self.renewal_countdown = self.refresh_interval;
                TraceEvent::Reset {
                    t,
                    iteration: self.set.iteration(),
                    entries: self.set.entries().to_vec(),
                }
            }
            Action::Pause { paused } => {
                self.set.set_paused(paused);
                TraceEvent::Paused { t, paused }
            }
            Action::SetRefreshInterval { secs } => {
                let min = self.config.ageing_interval;
                if !(min..=MAX_REFRESH_INTERVAL).contains(&secs) {
                    return Err(SessionError::InvalidRefreshInterval {
                        secs,
                        min,
                        max: MAX_REFRESH_INTERVAL,
                    });
                }
                self.refresh_interval = secs;
                self.renewal_countdown = secs;
                TraceEvent::RefreshIntervalSet { t, secs }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map() -> KnowledgeMap {
        let ids: Vec<String> = (0..40).map(|i| format!("d{i:02}")).collect();
        let coords: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let clusters: Vec<u32> = (0..40).map(|i| i / 4).collect();
        KnowledgeMap::with_clusters(ids, coords, clusters).unwrap()
    }

    fn start(seed: u64) -> (Session, KnowledgeMap) {
        let m = map();
        let (s, _) = Session::start(UserProfile::new("u", 0), EngineConfig::default(), &m, seed, 0).unwrap();
        (s, m)
    }

    #[test]
    fn renewal_every_refresh_interval() {
        let (mut s, m) = start(1);
        let events = s.advance_to(35, &m);
        let renewals: Vec<_> = events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Renewal { t, report } => Some((*t, report.replacements.len())),
                _ => None,
            })
            .collect();
        assert_eq!(renewals, vec![(10, 3), (20, 3), (30, 3)]);
        assert_eq!(s.seconds_to_refresh(), 5);
    }

    #[test]
    fn pause_freezes_countdown_and_fitness() {
        let (mut s, m) = start(2);
        let doc = s.set().entries()[0].doc;
        s.apply(&Action::Click { doc }, 3, &m).1.unwrap();
        s.apply(&Action::Pause { paused: true }, 4, &m).1.unwrap();
        let frozen = (s.seconds_to_refresh(), s.set().fitness_of(doc));
        let events = s.advance_to(100, &m);
        assert!(events.is_empty());
        assert_eq!((s.seconds_to_refresh(), s.set().fitness_of(doc)), frozen);
        s.apply(&Action::Pause { paused: false }, 100, &m).1.unwrap();
        s.advance_to(101, &m);
        assert_eq!(s.seconds_to_refresh(), frozen.0 - 1);
    }

    #[test]
    fn refresh_interval_bounds() {
        let (mut s, m) = start(3);
        let (events, r) = s.apply(&Action::SetRefreshInterval { secs: 0 }, 1, &m);
        assert!(matches!(r, Err(SessionError::InvalidRefreshInterval { secs: 0, .. })));
        assert!(matches!(events.last(), Some(TraceEvent::Rejected { .. })));
        assert!(s.apply(&Action::SetRefreshInterval { secs: 3601 }, 1, &m).1.is_err());
        s.apply(&Action::SetRefreshInterval { secs: 3 }, 1, &m).1.unwrap();
        let events = s.advance_to(7, &m);
        let times: Vec<_> = events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Renewal { .. }))
            .map(TraceEvent::time)
            .collect();
        assert_eq!(times, vec![4, 7]);
    }

    #[test]
    fn click_then_ageing() {
        let (mut s, m) = start(4);
        let doc = s.set().entries()[5].doc;
        let (events, r) = s.apply(&Action::Click { doc }, 2, &m);
        r.unwrap();
        assert!(matches!(events.last(), Some(TraceEvent::Click { before: 0, after: 10, .. })));
        s.advance_to(7, &m);
        assert_eq!(s.set().fitness_of(doc), Some(5));
        s.advance_to(12, &m);
        assert_eq!(s.set().fitness_of(doc), Some(0));
    }

    #[test]
    fn favorite_leaves_set_and_accrues() {
        let (mut s, m) = start(5);
        let doc = s.set().entries()[0].doc;
        let (events, r) = s.apply(&Action::AddFavorite { doc }, 1, &m);
        r.unwrap();
        assert!(matches!(events.last(), Some(TraceEvent::FavoriteAdded { evicted: Some(_), .. })));
        assert!(!s.set().contains(doc));
        s.advance_to(51, &m);
        assert_eq!(s.profile().favorites()[0].time_alive, 50);
        assert_eq!(
            s.apply(&Action::AddFavorite { doc }, 51, &m).1,
            Err(SessionError::User(UserError::AlreadyFavorite(doc)))
        );
    }

    #[test]
    fn dormancy_onset_once() {
        let (mut s, m) = start(6);
        let doc = s.set().entries()[0].doc;
        s.apply(&Action::AddFavorite { doc }, 0, &m).1.unwrap();
        let events = s.advance_to(1000, &m);
        let onsets: Vec<_> = events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::DormancyOnset { t, penalties } => Some((*t, penalties.clone())),
                _ => None,
            })
            .collect();
        assert_eq!(
            onsets,
            vec![(301, vec![Change { doc, before: 300, after: 0 }])]
        );
    }

    #[test]
    fn same_seed_same_trace() {
        let run = |seed| {
            let (mut s, m) = start(seed);
            let mut all = Vec::new();
            for t in (5..200).step_by(7) {
                let doc = s.set().entries()[(t % 10) as usize].doc;
                all.extend(s.apply(&Action::Click { doc }, t, &m).0);
            }
            all
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }
}
