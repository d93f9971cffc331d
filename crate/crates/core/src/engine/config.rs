use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::clock::Seconds;

/// Tunables of the evolutionary navigation engine. Key names are the ones
/// accepted in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Links shown at once, 7 to 10.
    pub set_size: usize,
    /// Lowest-fitness links swapped out per renewal.
    pub links_replace: usize,
    /// Fitness gained per click; defaults to `set_size` when unset.
    pub fitness_click_modifier: Option<u32>,
    pub ageing_interval: Seconds,
    pub refresh_interval: Seconds,
    pub mutation_probability: f64,
    pub history_recent_iterations: u64,
    pub favorites_fitness_const: u32,
    pub dormant_count: Seconds,
    pub rng_seed: u64,
    /// Always take the random branch (baseline for benchmarks).
    pub random_only: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            set_size: 10,
            links_replace: 3,
            fitness_click_modifier: None,
            ageing_interval: 1,
            refresh_interval: 10,
            mutation_probability: 0.3,
            history_recent_iterations: 20,
            favorites_fitness_const: 50,
            dormant_count: 300,
            rng_seed: 0,
            random_only: false,
        }
    }
}

impl EngineConfig {
    pub fn click_modifier(&self) -> u32 {
        self.fitness_click_modifier.unwrap_or(self.set_size as u32)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let fail = |m: String| Err(EngineError::InvalidConfig(m));
        if !(7..=10).contains(&self.set_size) {
            return fail(format!("set_size {} outside 7..=10", self.set_size));
        }
        if self.links_replace == 0 || self.links_replace > self.set_size / 2 {
            return fail(format!(
                "links_replace {} must be in 1..={}",
                self.links_replace,
                self.set_size / 2
            ));
        }
        if self.ageing_interval == 0 || self.ageing_interval > self.refresh_interval {
            return fail(format!(
                "ageing_interval {} must be in 1..=refresh_interval ({})",
                self.ageing_interval, self.refresh_interval
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return fail(format!("mutation_probability {} outside [0, 1]", self.mutation_probability));
        }
        if self.click_modifier() == 0 {
            return fail("fitness_click_modifier must be positive".into());
        }
        Ok(())
    }
}
