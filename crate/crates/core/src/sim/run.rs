//! One simulated user session under virtual time.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::agent::{Agent, AgentSpec};
use crate::engine::{compute_wpi, EngineConfig, Regime, ReplacementKind};
use crate::map::{ClusterId, DocIdx, KnowledgeMap};
use crate::session::{Action, Session, SessionError, TraceEvent};
use crate::user::{effective_favorites_fitness, UserProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub max_iterations: u64,
    /// Distinct target-cluster documents that must have been displayed for
    /// the target to count as reached (capped at the clusters' size).
    pub target_threshold: usize,
    pub keep_trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            target_threshold: 5,
            keep_trace: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// First iteration by which `target_threshold` distinct documents of
    /// the agent's target clusters had been displayed; `None` if never.
    pub iterations_to_target: Option<u64>,
    /// First iteration at which a relevance pick landed in a target cluster.
    pub first_relevant_hit: Option<u64>,
    pub iterations: u64,
    pub clicks_made: u64,
    pub favorites_added: u64,
    pub dormancy_onsets: u64,
    /// Replacements made in the interest regime, and how many were
    /// mutations.
    pub interest_replacements: u64,
    pub mutations: u64,
    pub mutation_fraction_observed: Option<f64>,
    pub final_wpi: Option<Vec<f64>>,
    /// Documents that returned to the set inside the recency window.
    pub history_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRun {
    pub metrics: RunMetrics,
    pub trace: Vec<TraceEvent>,
}

struct Observer {
    targets: HashSet<ClusterId>,
    threshold: usize,
    window: u64,
    shown_targets: HashSet<DocIdx>,
    in_set: HashSet<DocIdx>,
    last_in_set: HashMap<DocIdx, u64>,
    metrics: RunMetrics,
}

impl Observer {
    fn observe_set(&mut self, session: &Session, map: &KnowledgeMap) {
        let iteration = session.set().iteration();
        let now: HashSet<DocIdx> = session.set().docs().collect();
        for &d in now.difference(&self.in_set) {
            if let Some(&last) = self.last_in_set.get(&d) {
                if iteration - last <= self.window {
                    self.metrics.history_violations += 1;
                }
            }
        }
        for &d in &now {
            self.last_in_set.insert(d, iteration);
            if self.targets.contains(&map.cluster_of(d)) {
                self.shown_targets.insert(d);
            }
        }
        self.in_set = now;
        let available: usize = self.targets.iter().map(|c| map.members(*c).len()).sum();
        let needed = self.threshold.min(available).max(1);
        if self.metrics.iterations_to_target.is_none() && self.shown_targets.len() >= needed {
            self.metrics.iterations_to_target = Some(iteration);
        }
    }

    fn observe_events(&mut self, events: &[TraceEvent], map: &KnowledgeMap) {
        for e in events {
            match e {
                TraceEvent::Click { .. } => self.metrics.clicks_made += 1,
                TraceEvent::FavoriteAdded { .. } => self.metrics.favorites_added += 1,
                TraceEvent::DormancyOnset { .. } => self.metrics.dormancy_onsets += 1,
                TraceEvent::Renewal { report, .. } if report.regime == Regime::Interest => {
                    for r in &report.replacements {
                        self.metrics.interest_replacements += 1;
                        match r.kind {
                            ReplacementKind::Mutation => self.metrics.mutations += 1,
                            ReplacementKind::Relevant
                                if self.metrics.first_relevant_hit.is_none()
                                    && self.targets.contains(&map.cluster_of(r.new)) =>
                            {
                                self.metrics.first_relevant_hit = Some(report.iteration);
                            }
                            _ => {}
                        }
                    }
                }
                _ => {}
            }
        }
    }
}

/// Drives `agent` against a fresh session until the set has been renewed
/// `max_iterations` times. Fully determined by the agent seed and
/// `config.rng_seed`.
pub fn run_session(
    agent: &AgentSpec,
    config: &EngineConfig,
    map: &KnowledgeMap,
    run: &RunConfig,
) -> Result<SimRun, SessionError> {
    let profile = UserProfile::new(format!("agent-{}", agent.seed), 0);
    let (mut session, init) = Session::start(profile, config.clone(), map, config.rng_seed, 0)?;
    let mut actor = Agent::new(agent.clone(), map);
    let mut trace = Vec::new();
    let mut observer = Observer {
        targets: agent.targets(0).into_iter().collect(),
        threshold: run.target_threshold,
        window: config.history_recent_iterations,
        shown_targets: HashSet::new(),
        in_set: HashSet::new(),
        last_in_set: HashMap::new(),
        metrics: RunMetrics {
            iterations_to_target: None,
            first_relevant_hit: None,
            iterations: 0,
            clicks_made: 0,
            favorites_added: 0,
            dormancy_onsets: 0,
            interest_replacements: 0,
            mutations: 0,
            mutation_fraction_observed: None,
            final_wpi: None,
            history_violations: 0,
        },
    };
    observer.observe_set(&session, map);
    if run.keep_trace {
        trace.push(init);
    }

    let mut record = |events: Vec<TraceEvent>, session: &Session, observer: &mut Observer| {
        observer.observe_events(&events, map);
        observer.observe_set(session, map);
        if run.keep_trace {
            trace.extend(events);
        }
    };

    let mut clicks: u32 = 0;
    while session.set().iteration() < run.max_iterations {
        // targets can move (topic switcher)
        observer.targets = agent.targets(session.set().iteration()).into_iter().collect();
        let act_at = session.now() + agent.think_time;
        if agent.is_active_at(act_at) {
            if let Some(doc) = actor.choose(session.set(), map) {
                let (events, result) = session.apply(&Action::Click { doc }, act_at, map);
                record(events, &session, &mut observer);
                if result.is_ok() {
                    clicks += 1;
                    if agent.favorite_every.is_some_and(|n| n > 0 && clicks.is_multiple_of(n)) {
                        let favorites = session.profile().favorite_docs();
                        if favorites.len() >= agent.max_favorites.max(1) {
                            let (events, _) = session.apply(&Action::RemoveFavorite { doc: favorites[0] }, act_at, map);
                            record(events, &session, &mut observer);
                        }
                        let (events, _) = session.apply(&Action::AddFavorite { doc }, act_at, map);
                        record(events, &session, &mut observer);
                    }
                }
            }
        }
        let start_iteration = session.set().iteration();
        while session.set().iteration() == start_iteration {
            let t = session.now() + 1;
            let events = session.advance_to(t, map);
            record(events, &session, &mut observer);
        }
    }

    let mut metrics = observer.metrics;
    metrics.iterations = session.set().iteration();
    if metrics.interest_replacements > 0 {
        metrics.mutation_fraction_observed = Some(metrics.mutations as f64 / metrics.interest_replacements as f64);
    }
    let weight = effective_favorites_fitness(config.favorites_fitness_const, session.set());
    let favorites: Vec<(DocIdx, u32)> = session.profile().favorite_docs().into_iter().map(|d| (d, weight)).collect();
    metrics.final_wpi = compute_wpi(session.set(), &favorites, map).ok().map(|w| w.coord);
    Ok(SimRun { metrics, trace })
}

