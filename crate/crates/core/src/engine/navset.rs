use std::collections::HashSet;

use log::debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{compute_wpi, DisplayHistory, EngineConfig, EngineError, EngineRng};
use crate::map::{ClusterId, DocIdx, KnowledgeMap};
use crate::user::effective_favorites_fitness;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetEntry {
    pub doc: DocIdx,
    pub fitness: u32,
    pub entered_at_iteration: u64,
    /// Cluster this slot draws random replacements from.
    pub slot_cluster: ClusterId,
}

/// How a renewal chose its replacements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// No interest signal (or the engine is forced random).
    Random,
    /// Relevance to the WPI, with mutation.
    Interest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementKind {
    /// Random draw in the random regime.
    Random,
    /// Random draw that overrode relevance in the interest regime.
    Mutation,
    /// Nearest eligible document to the WPI.
    Relevant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replacement {
    pub slot: usize,
    pub old: DocIdx,
    pub new: DocIdx,
    pub kind: ReplacementKind,
    /// The recency rule had to be dropped to find any document.
    pub relaxed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalReport {
    pub iteration: u64,
    pub regime: Regime,
    pub wpi: Option<Vec<f64>>,
    /// Weight given to each favorite in the WPI, when there are favorites.
    pub favorites_weight: Option<u32>,
    pub replacements: Vec<Replacement>,
}

/// A user's fixed-size panel of links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavSet {
    entries: Vec<SetEntry>,
    iteration: u64,
    paused: bool,
}

/// Exclusion used for every draw: docs already taken, favorites, and
/// (unless relaxed) docs shown within the recency window.
struct Exclusion<'a> {
    taken: HashSet<DocIdx>,
    favorites: &'a [DocIdx],
    history: &'a DisplayHistory,
    iteration: u64,
}

impl Exclusion<'_> {
    fn strict(&self, d: DocIdx) -> bool {
        self.relaxed(d) || self.history.is_recently_shown(d, self.iteration)
    }

    fn relaxed(&self, d: DocIdx) -> bool {
        self.taken.contains(&d) || self.favorites.contains(&d)
    }
}

impl NavSet {
    /// Fresh set with one random document per slot, slot `n` drawing from
    /// cluster `n mod k`. All fitness is zero.
    pub fn init(
        map: &KnowledgeMap,
        config: &EngineConfig,
        favorites: &[DocIdx],
        history: &mut DisplayHistory,
        rng: &mut EngineRng,
    ) -> Result<Self, EngineError> {
        let entries = random_fill(map, config.set_size, 0, favorites, history, rng)?;
        let set = Self {
            entries,
            iteration: 0,
            paused: false,
        };
        history.record(set.docs(), 0);
        Ok(set)
    }

    /// Fresh set made of the documents nearest to `point`, for users whose
    /// earlier interest is already known. All fitness is zero.
    pub fn init_near(
        map: &KnowledgeMap,
        config: &EngineConfig,
        point: &[f64],
        favorites: &[DocIdx],
        history: &mut DisplayHistory,
    ) -> Result<Self, EngineError> {
        check_size(map, config.set_size)?;
        let mut ex = Exclusion {
            taken: HashSet::new(),
            favorites,
            history,
            iteration: 0,
        };
        let mut entries = Vec::with_capacity(config.set_size);
        for _ in 0..config.set_size {
            let doc = map
                .most_relevant(point, |d| ex.relaxed(d))
                .or_else(|_| map.most_relevant(point, |d| ex.taken.contains(&d)))
                .expect("map holds at least set_size documents");
            ex.taken.insert(doc);
            entries.push(SetEntry {
                doc,
                fitness: 0,
                entered_at_iteration: 0,
                slot_cluster: map.cluster_of(doc),
            });
        }
        let set = Self {
            entries,
            iteration: 0,
            paused: false,
        };
        history.record(set.docs(), 0);
        Ok(set)
    }

    /// A set with the given entries, e.g. restored from a snapshot.
    pub fn from_entries(entries: Vec<SetEntry>, iteration: u64) -> Self {
        Self {
            entries,
            iteration,
            paused: false,
        }
    }

    pub fn entries(&self) -> &[SetEntry] {
        &self.entries
    }

    pub fn docs(&self) -> impl Iterator<Item = DocIdx> + '_ {
        self.entries.iter().map(|e| e.doc)
    }

    pub fn contains(&self, doc: DocIdx) -> bool {
        self.entries.iter().any(|e| e.doc == doc)
    }

    pub fn fitness_of(&self, doc: DocIdx) -> Option<u32> {
        self.entries.iter().find(|e| e.doc == doc).map(|e| e.fitness)
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn set_paused(&mut self, paused: bool) {
        self.paused = paused;
    }

    /// Highest fitness in the set, 0 when the set is empty.
    pub fn max_fitness(&self) -> u32 {
        self.entries.iter().map(|e| e.fitness).max().unwrap_or(0)
    }

    pub fn has_positive_fitness(&self) -> bool {
        self.entries.iter().any(|e| e.fitness > 0)
    }

    /// Adds the click modifier to `doc`'s fitness; returns (before, after).
    pub fn register_click(&mut self, doc: DocIdx, config: &EngineConfig) -> Result<(u32, u32), EngineError> {
        let entry = self
            .entries
            .iter_mut()
            .find(|e| e.doc == doc)
            .ok_or(EngineError::NotInSet(doc))?;
        let before = entry.fitness;
        entry.fitness = before.saturating_add(config.click_modifier());
        Ok((before, entry.fitness))
    }

    /// Decrements every positive fitness by one. Returns (doc, before,
    /// after) for each changed entry. A paused set does not age.
    pub fn age(&mut self) -> Vec<(DocIdx, u32, u32)> {
        if self.paused {
            return Vec::new();
        }
        self.entries
            .iter_mut()
            .filter(|e| e.fitness > 0)
            .map(|e| {
                e.fitness -= 1;
                (e.doc, e.fitness + 1, e.fitness)
            })
            .collect()
    }

    /// Replaces every slot with a fresh random, zero-fitness draw. Counts as
    /// an iteration; recently shown documents are avoided.
    pub fn reset(
        &mut self,
        map: &KnowledgeMap,
        config: &EngineConfig,
        favorites: &[DocIdx],
        history: &mut DisplayHistory,
        rng: &mut EngineRng,
    ) -> Result<(), EngineError> {
        let iteration = self.iteration + 1;
        self.entries = random_fill(map, config.set_size, iteration, favorites, history, rng)?;
        self.iteration = iteration;
        history.record(self.docs(), iteration);
        Ok(())
    }

    /// Takes `doc` out of the set (it became a favorite) and fills its slot
    /// with a random draw from the slot's cluster. No iteration passes.
    pub fn evict(
        &mut self,
        doc: DocIdx,
        map: &KnowledgeMap,
        favorites: &[DocIdx],
        history: &mut DisplayHistory,
        rng: &mut EngineRng,
    ) -> Option<Replacement> {
        let slot = self.entries.iter().position(|e| e.doc == doc)?;
        let ex = Exclusion {
            taken: self.docs().collect(),
            favorites,
            history,
            iteration: self.iteration,
        };
        let cluster = self.entries[slot].slot_cluster;
        let (new, relaxed) = random_pick(map, cluster, &ex, rng)?;
        self.entries[slot] = SetEntry {
            doc: new,
            fitness: 0,
            entered_at_iteration: self.iteration,
            slot_cluster: cluster,
        };
        history.record([new], self.iteration);
        Some(Replacement {
            slot,
            old: doc,
            new,
            kind: ReplacementKind::Random,
            relaxed,
        })
    }

    /// One recombination step. Up to `links_replace` zero-fitness entries,
    /// longest-serving first, are replaced; positive fitness is never
    /// touched. Returns `None` when paused.
    pub fn renew(
        &mut self,
        map: &KnowledgeMap,
        config: &EngineConfig,
        favorites: &[DocIdx],
        history: &mut DisplayHistory,
        rng: &mut EngineRng,
    ) -> Option<RenewalReport> {
        if self.paused {
            return None;
        }
        let iteration = self.iteration + 1;

        let mut candidates: Vec<usize> = (0..self.entries.len())
            .filter(|&i| self.entries[i].fitness == 0)
            .collect();
        candidates.sort_by_key(|&i| (self.entries[i].entered_at_iteration, self.entries[i].doc));
        candidates.truncate(config.links_replace);

        let favorites_weight =
            (!favorites.is_empty()).then(|| effective_favorites_fitness(config.favorites_fitness_const, self));
        let weighted_favorites: Vec<(DocIdx, u32)> = favorites
            .iter()
            .map(|&d| (d, favorites_weight.unwrap_or(0)))
            .collect();
        let wpi = if config.random_only {
            None
        } else {
            compute_wpi(self, &weighted_favorites, map).ok()
        };
        let regime = if wpi.is_some() { Regime::Interest } else { Regime::Random };

        let mut ex = Exclusion {
            taken: self.docs().collect(),
            favorites,
            history,
            iteration,
        };
        let mut replacements = Vec::with_capacity(candidates.len());
        for slot in candidates {
            let old = self.entries[slot].doc;
            let kind = match &wpi {
                None => ReplacementKind::Random,
                Some(_) => {
                    let u: f64 = rng.random();
                    let p = config.mutation_probability;
                    if p > 0.0 && u <= p {
                        ReplacementKind::Mutation
                    } else {
                        ReplacementKind::Relevant
                    }
                }
            };
            let picked = match (&wpi, kind) {
                (Some(w), ReplacementKind::Relevant) => relevant_pick(map, &w.coord, &ex),
                _ => random_pick(map, self.entries[slot].slot_cluster, &ex, rng),
            };
            let Some((new, relaxed)) = picked else {
                debug!("slot {slot}: no eligible document, keeping {old}");
                continue;
            };
            let slot_cluster = if kind == ReplacementKind::Relevant {
                map.cluster_of(new)
            } else {
                self.entries[slot].slot_cluster
            };
            ex.taken.insert(new);
            self.entries[slot] = SetEntry {
                doc: new,
                fitness: 0,
                entered_at_iteration: iteration,
                slot_cluster,
            };
            replacements.push(Replacement {
                slot,
                old,
                new,
                kind,
                relaxed,
            });
        }
        drop(ex);
        self.iteration = iteration;
        history.record(self.docs(), iteration);
        Some(RenewalReport {
            iteration,
            regime,
            wpi: wpi.map(|w| w.coord),
            favorites_weight,
            replacements,
        })
    }
}

fn check_size(map: &KnowledgeMap, set_size: usize) -> Result<(), EngineError> {
    if map.size() < set_size {
        return Err(EngineError::MapTooSmall {
            docs: map.size(),
            needed: set_size,
        });
    }
    Ok(())
}

fn random_fill(
    map: &KnowledgeMap,
    set_size: usize,
    iteration: u64,
    favorites: &[DocIdx],
    history: &DisplayHistory,
    rng: &mut EngineRng,
) -> Result<Vec<SetEntry>, EngineError> {
    check_size(map, set_size)?;
    let k = map.n_clusters().max(1);
    let mut ex = Exclusion {
        taken: HashSet::new(),
        favorites,
        history,
        iteration,
    };
    let mut entries = Vec::with_capacity(set_size);
    for n in 0..set_size {
        let cluster = ClusterId((n % k) as u32);
        let doc = match random_pick(map, cluster, &ex, rng) {
            Some((d, _)) => d,
            // only favorites are left: they may share the set
            None => map
                .random_document(rng, |d| ex.taken.contains(&d))
                .expect("map holds at least set_size documents"),
        };
        ex.taken.insert(doc);
        entries.push(SetEntry {
            doc,
            fitness: 0,
            entered_at_iteration: iteration,
            slot_cluster: cluster,
        });
    }
    Ok(entries)
}

/// Random draw from `cluster`, falling back to the whole corpus, then to
/// ignoring the recency rule. The flag reports the last fallback.
fn random_pick(
    map: &KnowledgeMap,
    cluster: ClusterId,
    ex: &Exclusion<'_>,
    rng: &mut EngineRng,
) -> Option<(DocIdx, bool)> {
    if let Ok(d) = map.random_from_cluster(cluster, rng, |d| ex.strict(d)) {
        return Some((d, false));
    }
    if let Ok(d) = map.random_document(rng, |d| ex.strict(d)) {
        return Some((d, false));
    }
    map.random_document(rng, |d| ex.relaxed(d)).ok().map(|d| (d, true))
}

fn relevant_pick(map: &KnowledgeMap, point: &[f64], ex: &Exclusion<'_>) -> Option<(DocIdx, bool)> {
    if let Ok(d) = map.most_relevant(point, |d| ex.strict(d)) {
        return Some((d, false));
    }
    map.most_relevant(point, |d| ex.relaxed(d)).ok().map(|d| (d, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    /// 20 docs on a line, x = 0..20, four clusters of five.
    fn line_map() -> KnowledgeMap {
        let ids: Vec<String> = (0..20).map(|i| format!("d{i:02}")).collect();
        let coords: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let clusters: Vec<u32> = (0..20).map(|i| i / 5).collect();
        KnowledgeMap::with_clusters(ids, coords, clusters).unwrap()
    }

    fn config() -> EngineConfig {
        EngineConfig {
            set_size: 8,
            links_replace: 3,
            history_recent_iterations: 2,
            ..EngineConfig::default()
        }
    }

    fn fresh(map: &KnowledgeMap, config: &EngineConfig, seed: u64) -> (NavSet, DisplayHistory, EngineRng) {
        let mut rng = EngineRng::seed_from_u64(seed);
        let mut history = DisplayHistory::new(config.history_recent_iterations);
        let set = NavSet::init(map, config, &[], &mut history, &mut rng).unwrap();
        (set, history, rng)
    }

    #[test]
    fn init_binds_slots_to_clusters() {
        let map = line_map();
        let (set, _, _) = fresh(&map, &config(), 1);
        assert_eq!(set.entries().len(), 8);
        for (n, e) in set.entries().iter().enumerate() {
            assert_eq!(e.slot_cluster, ClusterId((n % 4) as u32));
            assert_eq!(map.cluster_of(e.doc), e.slot_cluster);
            assert_eq!(e.fitness, 0);
        }
        let distinct: HashSet<_> = set.docs().collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn init_rejects_small_map() {
        let ids: Vec<String> = (0..5).map(|i| format!("d{i}")).collect();
        let coords: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let map = KnowledgeMap::with_clusters(ids, coords, vec![0; 5]).unwrap();
        let mut rng = EngineRng::seed_from_u64(0);
        let mut h = DisplayHistory::new(20);
        assert_eq!(
            NavSet::init(&map, &config(), &[], &mut h, &mut rng),
            Err(EngineError::MapTooSmall { docs: 5, needed: 8 })
        );
    }

    #[test]
    fn clicks_and_ageing() {
        let map = line_map();
        let c = config();
        let (mut set, _, _) = fresh(&map, &c, 2);
        let doc = set.entries()[3].doc;
        assert_eq!(set.register_click(doc, &c), Ok((0, 8)));
        assert_eq!(set.register_click(doc, &c), Ok((8, 16)));
        let outside = map.doc_ids().find(|d| !set.contains(*d)).unwrap();
        assert_eq!(set.register_click(outside, &c), Err(EngineError::NotInSet(outside)));
        for _ in 0..16 {
            assert_eq!(set.age().len(), 1);
        }
        assert_eq!(set.fitness_of(doc), Some(0));
        assert!(set.age().is_empty());
    }

    #[test]
    fn random_regime_replaces_exactly_links_replace() {
        let map = line_map();
        let c = config();
        let (mut set, mut h, mut rng) = fresh(&map, &c, 3);
        let before: Vec<_> = set.entries().to_vec();
        let report = set.renew(&map, &c, &[], &mut h, &mut rng).unwrap();
        assert_eq!(report.regime, Regime::Random);
        assert_eq!(report.replacements.len(), 3);
        // ties on entry iteration fall to doc order
        let mut oldest: Vec<_> = before.iter().map(|e| e.doc).collect();
        oldest.sort();
        let replaced: Vec<_> = report.replacements.iter().map(|r| r.old).collect();
        assert_eq!(replaced, oldest[..3].to_vec());
        for r in &report.replacements {
            assert_eq!(r.kind, ReplacementKind::Random);
            assert_eq!(map.cluster_of(r.new), before[r.slot].slot_cluster);
        }
        assert_eq!(set.iteration(), 1);
    }

    #[test]
    fn positive_fitness_is_protected() {
        let map = line_map();
        let c = config();
        let (mut set, mut h, mut rng) = fresh(&map, &c, 4);
        let docs: Vec<_> = set.docs().collect();
        for d in &docs[..6] {
            set.register_click(*d, &c).unwrap();
        }
        let report = set.renew(&map, &c, &[], &mut h, &mut rng).unwrap();
        assert_eq!(report.regime, Regime::Interest);
        assert_eq!(report.replacements.len(), 2);
        for d in &docs[..6] {
            assert!(set.contains(*d));
        }
    }

    #[test]
    fn paused_set_is_frozen() {
        let map = line_map();
        let c = config();
        let (mut set, mut h, mut rng) = fresh(&map, &c, 5);
        set.register_click(set.entries()[0].doc, &c).unwrap();
        set.set_paused(true);
        let before = set.clone();
        assert!(set.renew(&map, &c, &[], &mut h, &mut rng).is_none());
        assert!(set.age().is_empty());
        assert_eq!(set, before);
    }

    #[test]
    fn favorites_stay_out_of_the_set() {
        let map = line_map();
        let c = config();
        let (mut set, mut h, mut rng) = fresh(&map, &c, 6);
        let fav = set.entries()[2].doc;
        let r = set.evict(fav, &map, &[fav], &mut h, &mut rng).unwrap();
        assert_eq!(r.slot, 2);
        assert!(!set.contains(fav));
        for _ in 0..30 {
            set.renew(&map, &c, &[fav], &mut h, &mut rng).unwrap();
            assert!(!set.contains(fav));
            set.reset(&map, &c, &[fav], &mut h, &mut rng).unwrap();
            assert!(!set.contains(fav));
        }
    }

    #[test]
    fn reset_zeroes_fitness_and_draws_new_documents() {
        let map = line_map();
        let c = config();
        let (mut set, mut h, mut rng) = fresh(&map, &c, 7);
        set.register_click(set.entries()[1].doc, &c).unwrap();
        let first: HashSet<_> = set.docs().collect();
        set.reset(&map, &c, &[], &mut h, &mut rng).unwrap();
        assert!(set.entries().iter().all(|e| e.fitness == 0));
        let second: HashSet<_> = set.docs().collect();
        assert!(first.is_disjoint(&second));
    }

    #[test]
    fn relevance_fill_uses_nearest_documents() {
        let map = line_map();
        let c = EngineConfig {
            mutation_probability: 0.0,
            ..config()
        };
        let (mut set, mut h, mut rng) = fresh(&map, &c, 8);
        let clicked = set.entries()[0].doc;
        set.register_click(clicked, &c).unwrap();
        let current: HashSet<_> = set.docs().collect();
        let report = set.renew(&map, &c, &[], &mut h, &mut rng).unwrap();
        let x = map.coord(clicked)[0];
        let mut expected: Vec<DocIdx> = map.doc_ids().filter(|d| !current.contains(d)).collect();
        expected.sort_by(|a, b| {
            let da = (map.coord(*a)[0] - x).abs();
            let db = (map.coord(*b)[0] - x).abs();
            da.partial_cmp(&db).unwrap().then(a.cmp(b))
        });
        let got: Vec<_> = report.replacements.iter().map(|r| r.new).collect();
        assert_eq!(got, expected[..3].to_vec());
        assert!(report.replacements.iter().all(|r| r.kind == ReplacementKind::Relevant));
    }

    #[test]
    fn init_near_takes_the_closest_documents() {
        let map = line_map();
        let c = config();
        let mut h = DisplayHistory::new(2);
        let set = NavSet::init_near(&map, &c, &[19.0], &[map.find("d19").unwrap()], &mut h).unwrap();
        let mut docs: Vec<_> = set.docs().map(|d| map.document(d).id.clone()).collect();
        docs.sort();
        let expected: Vec<String> = (11..19).map(|i| format!("d{i:02}")).collect();
        assert_eq!(docs, expected);
    }
}
