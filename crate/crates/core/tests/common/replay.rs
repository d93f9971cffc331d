//! Trace checker: rebuilds a session's state from its event trace alone and
//! reports every departure from the navigation rules. It shares no logic
//! with the engine beyond the event types and the map's coordinates.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use adaptnav_core::engine::{Regime, ReplacementKind, SetEntry};
use adaptnav_core::session::TraceEvent;
use adaptnav_core::{ClusterId, DocIdx, KnowledgeMap};

#[derive(Debug, Clone)]
pub struct Rules {
    pub set_size: usize,
    pub links_replace: usize,
    pub click_modifier: u32,
    pub window: u64,
    pub dormant_count: u64,
    pub favorites_const: u32,
    pub random_only: bool,
}

#[derive(Debug, Default, Clone)]
pub struct Tally {
    pub clicks: u64,
    pub ageing_steps: u64,
    pub renewals: u64,
    pub zero_regime_renewals: u64,
    pub relevant_checked: u64,
    pub wpi_checked: u64,
    pub favorites_weight_checked: u64,
    pub dormancy_onsets: u64,
    pub reentries_checked: u64,
    pub interest_replacements: u64,
    pub mutations: u64,
}

#[derive(Debug, Clone)]
struct Slot {
    doc: DocIdx,
    fitness: u32,
    entered: u64,
    cluster: ClusterId,
}

pub struct Replay<'a> {
    map: &'a KnowledgeMap,
    rules: Rules,
    slots: Vec<Slot>,
    iteration: u64,
    favorites: Vec<DocIdx>,
    time_alive: HashMap<DocIdx, u64>,
    last_shown: HashMap<DocIdx, u64>,
    last_action: u64,
    dormant: bool,
    accrued_until: u64,
    need_age_at: Option<u64>,
    paused: bool,
    pub violations: Vec<String>,
    pub tally: Tally,
}

fn squared(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl<'a> Replay<'a> {
    pub fn new(map: &'a KnowledgeMap, rules: Rules) -> Self {
        Self {
            map,
            rules,
            slots: Vec::new(),
            iteration: 0,
            favorites: Vec::new(),
            time_alive: HashMap::new(),
            last_shown: HashMap::new(),
            last_action: 0,
            dormant: false,
            accrued_until: 0,
            need_age_at: None,
            paused: false,
            violations: Vec::new(),
            tally: Tally::default(),
        }
    }

    fn fail(&mut self, t: u64, msg: String) {
        self.violations.push(format!("t={t}: {msg}"));
    }

    fn max_fitness(&self) -> u32 {
        self.slots.iter().map(|s| s.fitness).max().unwrap_or(0)
    }

    fn favorites_weight(&self) -> u32 {
        self.rules.favorites_const.max(2 * self.max_fitness())
    }

    fn docs(&self) -> HashSet<DocIdx> {
        self.slots.iter().map(|s| s.doc).collect()
    }

    fn recent(&self, doc: DocIdx, iteration: u64) -> bool {
        self.last_shown
            .get(&doc)
            .is_some_and(|&l| iteration - l <= self.rules.window)
    }

    fn mark_shown(&mut self) {
        for s in &self.slots {
            self.last_shown.insert(s.doc, self.iteration);
        }
    }

    fn check_entering(&mut self, t: u64, doc: DocIdx, iteration: u64, before: &HashSet<DocIdx>) {
        if before.contains(&doc) {
            self.fail(t, format!("{doc} entered while already in the set"));
        }
        if self.favorites.contains(&doc) {
            self.fail(t, format!("favorite {doc} entered the set"));
        }
        if let Some(&l) = self.last_shown.get(&doc) {
            self.tally.reentries_checked += 1;
            if iteration - l <= self.rules.window {
                self.fail(t, format!("{doc} back at iteration {iteration}, last shown {l}"));
            }
        }
    }

    fn load_entries(&mut self, entries: &[SetEntry]) {
        self.slots = entries
            .iter()
            .map(|e| Slot {
                doc: e.doc,
                fitness: e.fitness,
                entered: e.entered_at_iteration,
                cluster: e.slot_cluster,
            })
            .collect();
    }

    /// Favorites accounting for every periodic step up to and including
    /// second `t`; an onset event at `t` means step `t` did not accrue.
    fn accrue(&mut self, t: u64, is_onset: bool) {
        while self.accrued_until < t {
            let s = self.accrued_until + 1;
            self.accrued_until = s;
            if self.dormant {
                continue;
            }
            if s - self.last_action > self.rules.dormant_count {
                if !(s == t && is_onset) {
                    self.fail(s, "missed dormancy onset".into());
                    self.dormant = true;
                }
                continue;
            }
            for f in &self.favorites {
                *self.time_alive.entry(*f).or_default() += 1;
            }
        }
    }

    fn check_ageing_due(&mut self, t: u64, periodic: bool) {
        if let Some(n) = self.need_age_at {
            if t > n || (t == n && !periodic) {
                self.fail(n, "positive fitness was not aged".into());
                self.need_age_at = None;
            }
        }
    }

    fn after_event(&mut self, t: u64) {
        if self.paused || self.max_fitness() == 0 {
            self.need_age_at = None;
        } else if self.need_age_at.is_none() && self.max_fitness() > 0 {
            self.need_age_at = Some(t + 1);
        }
    }

    fn touch(&mut self, t: u64) {
        self.last_action = t;
        self.dormant = false;
    }

    pub fn feed(&mut self, event: &TraceEvent) {
        let t = event.time();
        let periodic = matches!(
            event,
            TraceEvent::Aged { .. } | TraceEvent::Renewal { .. } | TraceEvent::DormancyOnset { .. }
        );
        self.check_ageing_due(t, periodic);
        self.accrue(t, matches!(event, TraceEvent::DormancyOnset { .. }));
        match event {
            TraceEvent::SetInitialized { t, entries, iteration, .. } => {
                self.load_entries(entries);
                self.iteration = *iteration;
                self.accrued_until = *t;
                self.last_action = *t;
                if entries.len() != self.rules.set_size {
                    self.fail(*t, format!("initial set has {} entries", entries.len()));
                }
                if entries.iter().any(|e| e.fitness != 0) {
                    self.fail(*t, "initial fitness not zero".into());
                }
                self.mark_shown();
            }
            TraceEvent::Click { doc, before, after, .. } => {
                self.touch(t);
                self.tally.clicks += 1;
                match self.slots.iter_mut().find(|s| s.doc == *doc) {
                    Some(s) => {
                        let (expected_before, got) = (s.fitness, *after);
                        s.fitness = *after;
                        if expected_before != *before {
                            self.fail(t, format!("click on {doc}: before {before}, replay {expected_before}"));
                        }
                        if got != before + self.rules.click_modifier {
                            self.fail(t, format!("click on {doc}: {before} -> {got}"));
                        }
                    }
                    None => self.fail(t, format!("click on {doc} outside the set")),
                }
            }
            TraceEvent::Aged { changes, .. } => {
                self.tally.ageing_steps += 1;
                if self.need_age_at == Some(t) {
                    self.need_age_at = None;
                }
                let positive: HashSet<DocIdx> =
                    self.slots.iter().filter(|s| s.fitness > 0).map(|s| s.doc).collect();
                let changed: HashSet<DocIdx> = changes.iter().map(|c| c.doc).collect();
                if positive != changed {
                    self.fail(t, format!("aged {changed:?}, positive entries {positive:?}"));
                }
                for c in changes {
                    if c.after + 1 != c.before {
                        self.fail(t, format!("ageing {} -> {}", c.before, c.after));
                    }
                    if let Some(s) = self.slots.iter_mut().find(|s| s.doc == c.doc) {
                        s.fitness = c.after;
                    }
                }
            }
            TraceEvent::Renewal { report, .. } => self.renewal(t, report),
            TraceEvent::DormancyOnset { penalties, .. } => {
                self.tally.dormancy_onsets += 1;
                if self.dormant {
                    self.fail(t, "second penalty in one dormant period".into());
                }
                if t - self.last_action != self.rules.dormant_count + 1 {
                    self.fail(t, format!("onset {}s after last action", t - self.last_action));
                }
                self.dormant = true;
                let got: HashSet<DocIdx> = penalties.iter().map(|p| p.doc).collect();
                let live: HashSet<DocIdx> = self.favorites.iter().copied().collect();
                if got != live {
                    self.fail(t, "penalties do not cover exactly the live favorites".into());
                }
                for p in penalties {
                    let ta = self.time_alive.get(&p.doc).copied().unwrap_or(0);
                    if p.before != ta {
                        self.fail(t, format!("penalty on {}: before {}, replay {ta}", p.doc, p.before));
                    }
                    if p.after != ta.saturating_sub(self.rules.dormant_count) {
                        self.fail(t, format!("penalty on {}: {} -> {}", p.doc, p.before, p.after));
                    }
                    self.time_alive.insert(p.doc, p.after);
                }
            }
            TraceEvent::FavoriteAdded { doc, evicted, .. } => {
                self.touch(t);
                if self.favorites.contains(doc) {
                    self.fail(t, format!("{doc} added twice"));
                }
                self.favorites.push(*doc);
                self.time_alive.insert(*doc, 0);
                let in_set = self.slots.iter().position(|s| s.doc == *doc);
                match (in_set, evicted) {
                    (None, None) => {}
                    (Some(slot), Some(r)) if r.slot == slot && r.old == *doc => {
                        let before = self.docs();
                        self.check_entering(t, r.new, self.iteration, &before);
                        self.slots[slot].doc = r.new;
                        self.slots[slot].fitness = 0;
                        self.slots[slot].entered = self.iteration;
                        self.last_shown.insert(r.new, self.iteration);
                    }
                    _ => self.fail(t, format!("favorite {doc} not moved out of the set correctly")),
                }
            }
            TraceEvent::FavoriteRemoved { doc, .. } => {
                self.touch(t);
                self.favorites.retain(|f| f != doc);
                self.time_alive.remove(doc);
            }
            TraceEvent::Reset { iteration, entries, .. } => {
                self.touch(t);
                if *iteration != self.iteration + 1 {
                    self.fail(t, format!("reset to iteration {iteration}"));
                }
                let before = self.docs();
                for e in entries {
                    self.check_entering(t, e.doc, *iteration, &before);
                }
                self.iteration = *iteration;
                self.load_entries(entries);
                if entries.iter().any(|e| e.fitness != 0) {
                    self.fail(t, "reset left fitness".into());
                }
                self.mark_shown();
            }
            TraceEvent::Paused { paused, .. } => {
                self.touch(t);
                self.paused = *paused;
            }
            TraceEvent::RefreshIntervalSet { .. } | TraceEvent::Rejected { .. } => self.touch(t),
        }
        let distinct: HashSet<DocIdx> = self.docs();
        if distinct.len() != self.rules.set_size || self.slots.len() != self.rules.set_size {
            self.fail(t, "set size or distinctness broken".into());
        }
        self.after_event(t);
    }

    fn renewal(&mut self, t: u64, report: &adaptnav_core::engine::RenewalReport) {
        self.tally.renewals += 1;
        let iteration = self.iteration + 1;
        if report.iteration != iteration {
            self.fail(t, format!("renewal iteration {} after {}", report.iteration, self.iteration));
        }
        let positive = self.max_fitness() > 0;
        let interest = !self.rules.random_only && (positive || !self.favorites.is_empty());
        let expected_regime = if interest { Regime::Interest } else { Regime::Random };
        if report.regime != expected_regime {
            self.fail(t, format!("regime {:?}, expected {expected_regime:?}", report.regime));
        }

        // which slots must go: zero fitness, longest in the set, then doc
        let mut zero: Vec<usize> = (0..self.slots.len()).filter(|&i| self.slots[i].fitness == 0).collect();
        zero.sort_by_key(|&i| (self.slots[i].entered, self.slots[i].doc));
        zero.truncate(self.rules.links_replace);
        let got: Vec<usize> = report.replacements.iter().map(|r| r.slot).collect();
        if got != zero {
            self.fail(t, format!("replaced slots {got:?}, expected {zero:?}"));
        }
        if !positive && self.favorites.is_empty() {
            self.tally.zero_regime_renewals += 1;
            if report.replacements.len() != self.rules.links_replace {
                self.fail(t, format!("{} replacements in the zero-fitness regime", report.replacements.len()));
            }
        }

        // favorites weight and WPI
        if self.favorites.is_empty() {
            if report.favorites_weight.is_some() {
                self.fail(t, "favorites weight without favorites".into());
            }
        } else {
            self.tally.favorites_weight_checked += 1;
            if report.favorites_weight != Some(self.favorites_weight()) {
                self.fail(
                    t,
                    format!("favorites weight {:?}, expected {}", report.favorites_weight, self.favorites_weight()),
                );
            }
        }
        let wpi = if interest {
            let fav_w = f64::from(self.favorites_weight());
            let dim = self.map.dimensionality();
            let mut acc = vec![0.0; dim];
            let mut total = 0.0;
            let points = self
                .slots
                .iter()
                .filter(|s| s.fitness > 0)
                .map(|s| (s.doc, f64::from(s.fitness)))
                .chain(self.favorites.iter().map(|f| (*f, fav_w)));
            for (doc, w) in points {
                total += w;
                for (a, x) in acc.iter_mut().zip(self.map.coord(doc)) {
                    *a += w * x;
                }
            }
            acc.iter_mut().for_each(|a| *a /= total);
            Some(acc)
        } else {
            None
        };
        match (&wpi, &report.wpi) {
            (Some(a), Some(b)) => {
                self.tally.wpi_checked += 1;
                let err = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                if err > 1e-9 {
                    self.fail(t, format!("WPI off by {err:e}"));
                }
            }
            (None, None) => {}
            _ => self.fail(t, "WPI presence mismatch".into()),
        }

        let before = self.docs();
        let mut taken = before.clone();
        for r in &report.replacements {
            if !interest && r.kind != ReplacementKind::Random {
                self.fail(t, format!("{:?} replacement in the random regime", r.kind));
            }
            if interest {
                self.tally.interest_replacements += 1;
                if r.kind == ReplacementKind::Mutation {
                    self.tally.mutations += 1;
                }
            }
            let excluded =
                |d: DocIdx, me: &Self| taken.contains(&d) || me.favorites.contains(&d) || me.recent(d, iteration);
            match r.kind {
                ReplacementKind::Relevant => {
                    let w = wpi.as_ref().expect("interest regime");
                    let best = self
                        .map
                        .doc_ids()
                        .filter(|d| !excluded(*d, self))
                        .min_by(|a, b| {
                            squared(self.map.coord(*a), w)
                                .total_cmp(&squared(self.map.coord(*b), w))
                                .then(a.cmp(b))
                        });
                    self.tally.relevant_checked += 1;
                    if best != Some(r.new) {
                        self.fail(t, format!("relevant pick {} but nearest eligible is {best:?}", r.new));
                    }
                }
                ReplacementKind::Random | ReplacementKind::Mutation => {
                    let cluster = self.slots[r.slot].cluster;
                    let cluster_open = self.map.members(cluster).iter().any(|d| !excluded(*d, self));
                    if cluster_open && self.map.cluster_of(r.new) != cluster {
                        self.fail(t, format!("random pick {} outside slot cluster {cluster:?}", r.new));
                    }
                }
            }
            if self.slots[r.slot].fitness > 0 {
                self.fail(t, format!("positive-fitness slot {} replaced", r.slot));
            }
            if self.slots[r.slot].doc != r.old {
                self.fail(t, format!("slot {} held {}, report says {}", r.slot, self.slots[r.slot].doc, r.old));
            }
            self.check_entering(t, r.new, iteration, &taken);
            taken.insert(r.new);
            let cluster = if r.kind == ReplacementKind::Relevant {
                self.map.cluster_of(r.new)
            } else {
                self.slots[r.slot].cluster
            };
            self.slots[r.slot] = Slot {
                doc: r.new,
                fitness: 0,
                entered: iteration,
                cluster,
            };
        }
        self.iteration = iteration;
        self.mark_shown();
    }

    pub fn feed_all<'e>(&mut self, events: impl IntoIterator<Item = &'e TraceEvent>) {
        for e in events {
            self.feed(e);
        }
    }
}
