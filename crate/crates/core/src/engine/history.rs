use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::map::DocIdx;

/// When each document was last on display, by iteration number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplayHistory {
    window: u64,
    last_shown: BTreeMap<DocIdx, u64>,
}

impl DisplayHistory {
    pub fn new(window: u64) -> Self {
        Self {
            window,
            last_shown: BTreeMap::new(),
        }
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    /// True iff `doc` was on display within the last `window` iterations.
    pub fn is_recently_shown(&self, doc: DocIdx, iteration: u64) -> bool {
        self.last_shown
            .get(&doc)
            .is_some_and(|&s| iteration.saturating_sub(s) <= self.window)
    }

    pub fn last_shown(&self, doc: DocIdx) -> Option<u64> {
        self.last_shown.get(&doc).copied()
    }

    /// Marks `docs` as displayed at `iteration` and forgets anything that has
    /// left the window.
    pub fn record(&mut self, docs: impl IntoIterator<Item = DocIdx>, iteration: u64) {
        for d in docs {
            self.last_shown.insert(d, iteration);
        }
        let window = self.window;
        self.last_shown
            .retain(|_, s| iteration.saturating_sub(*s) <= window);
    }
}
