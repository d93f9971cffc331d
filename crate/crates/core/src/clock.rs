//! Time sources. All engine timing is in whole seconds read from an
//! injected clock, so the service runs on wall time while tests and
//! simulations run on virtual time.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

/// Whole seconds since an arbitrary epoch.
pub type Seconds = u64;

pub trait Clock: Send + Sync {
    fn now(&self) -> Seconds;
}

/// Wall-clock seconds since the Unix epoch.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Seconds {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }
}

/// A clock that only moves when told to.
#[derive(Debug, Default)]
pub struct ManualClock {
    now: AtomicU64,
}

impl ManualClock {
    pub fn new(start: Seconds) -> Self {
        Self {
            now: AtomicU64::new(start),
        }
    }

    pub fn advance(&self, secs: Seconds) -> Seconds {
        self.now.fetch_add(secs, Ordering::SeqCst) + secs
    }

    /// Moves to `t`; never moves backwards.
    pub fn set(&self, t: Seconds) {
        self.now.fetch_max(t, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Seconds {
        self.now.load(Ordering::SeqCst)
    }
}
