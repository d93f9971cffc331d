//! Scripted users that click according to a fixed interest.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::Seconds;
use crate::engine::NavSet;
use crate::map::{euclidean, ClusterId, DocIdx, KnowledgeMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Behavior {
    RandomClicker,
    TopicSeeker {
        target: ClusterId,
    },
    TopicSwitcher {
        from: ClusterId,
        to: ClusterId,
        switch_at_iteration: u64,
    },
    MultiInterest {
        clusters: Vec<ClusterId>,
    },
    Idle,
}

/// On/off activity pattern; the agent only acts during the first `active`
/// seconds of every `active + idle` period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityCycle {
    pub active: Seconds,
    pub idle: Seconds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentSpec {
    pub behavior: Behavior,
    pub seed: u64,
    /// An entry is clickable when it lies within this multiple of the
    /// target cluster's radius (largest member-to-centroid distance).
    pub radius_scale: f64,
    /// Delay between seeing a renewed set and acting on it.
    pub think_time: Seconds,
    /// Every n-th click also adds the clicked document to Favorites.
    pub favorite_every: Option<u32>,
    /// Oldest favorite is dropped before exceeding this many.
    pub max_favorites: usize,
    pub activity: Option<ActivityCycle>,
}

impl Default for AgentSpec {
    fn default() -> Self {
        Self {
            behavior: Behavior::Idle,
            seed: 0,
            radius_scale: 1.0,
            think_time: 1,
            favorite_every: None,
            max_favorites: 3,
            activity: None,
        }
    }
}

impl AgentSpec {
    pub fn seeker(target: ClusterId, seed: u64) -> Self {
        Self {
            behavior: Behavior::TopicSeeker { target },
            seed,
            ..Self::default()
        }
    }

    pub fn is_active_at(&self, t: Seconds) -> bool {
        match self.activity {
            None => true,
            Some(c) if c.active + c.idle == 0 => true,
            Some(c) => t % (c.active + c.idle) < c.active,
        }
    }

    /// Clusters the agent currently wants, given the set's iteration.
    pub fn targets(&self, iteration: u64) -> Vec<ClusterId> {
        match &self.behavior {
            Behavior::TopicSeeker { target } => vec![*target],
            Behavior::TopicSwitcher {
                from,
                to,
                switch_at_iteration,
            } => vec![if iteration < *switch_at_iteration { *from } else { *to }],
            Behavior::MultiInterest { clusters } => clusters.clone(),
            Behavior::RandomClicker | Behavior::Idle => Vec::new(),
        }
    }
}

/// Live agent: an `AgentSpec` plus its own random stream and click memory.
pub struct Agent {
    spec: AgentSpec,
    rng: ChaCha8Rng,
    radii: Vec<f64>,
    /// (doc, iteration it entered the set): each appearance is clicked once.
    clicked: HashSet<(DocIdx, u64)>,
}

impl Agent {
    pub fn new(spec: AgentSpec, map: &KnowledgeMap) -> Self {
        let radii = (0..map.n_clusters())
            .map(|c| {
                let c = ClusterId(c as u32);
                map.members(c)
                    .iter()
                    .map(|d| euclidean(map.coord(*d), map.centroid(c)))
                    .fold(0.0, f64::max)
            })
            .collect();
        Self {
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            spec,
            radii,
            clicked: HashSet::new(),
        }
    }

    pub fn spec(&self) -> &AgentSpec {
        &self.spec
    }

    /// The entry this agent would click now, if any.
    pub fn choose(&mut self, set: &NavSet, map: &KnowledgeMap) -> Option<DocIdx> {
        let choice = match &self.spec.behavior {
            Behavior::Idle => None,
            Behavior::RandomClicker => {
                let entries = set.entries();
                (!entries.is_empty()).then(|| entries[self.rng.random_range(0..entries.len())].doc)
            }
            _ => {
                let targets = self.spec.targets(set.iteration());
                let mut best: Option<(f64, DocIdx)> = None;
                for e in set
                    .entries()
                    .iter()
                    .filter(|e| !self.clicked.contains(&(e.doc, e.entered_at_iteration)))
                {
                    for &c in &targets {
                        let d = euclidean(map.coord(e.doc), map.centroid(c));
                        let radius = self.spec.radius_scale * self.radii.get(c.index()).copied().unwrap_or(0.0);
                        if d <= radius && best.is_none_or(|(bd, bdoc)| d < bd || (d == bd && e.doc < bdoc)) {
                            best = Some((d, e.doc));
                        }
                    }
                }
                best.map(|(_, d)| d)
            }
        };
        if let Some(d) = choice {
            let entered = set
                .entries()
                .iter()
                .find(|e| e.doc == d)
                .map_or(0, |e| e.entered_at_iteration);
            self.clicked.insert((d, entered));
        }
        choice
    }
}
