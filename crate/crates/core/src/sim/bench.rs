//! Adaptive versus forced-random convergence benchmark.

use serde::{Deserialize, Serialize};

use super::agent::AgentSpec;
use super::run::{run_session, RunConfig};
use super::stats::{bootstrap_median_ci, median, Interval};
use crate::engine::EngineConfig;
use crate::map::KnowledgeMap;
use crate::session::SessionError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub n_runs: usize,
    pub run: RunConfig,
    pub resamples: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_runs: 200,
            run: RunConfig {
                keep_trace: false,
                ..RunConfig::default()
            },
            resamples: 2000,
            confidence: 0.95,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub runs: usize,
    /// Runs that never reached the target; counted as `max_iterations + 1`.
    pub censored: usize,
    pub median: Option<f64>,
    pub ci: Option<Interval>,
    pub iterations_to_target: Vec<f64>,
    pub history_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub adaptive: ArmSummary,
    pub random: ArmSummary,
}

impl BenchReport {
    /// Adaptive median strictly lower and the confidence intervals disjoint.
    pub fn adaptive_wins(&self) -> bool {
        match (
            self.adaptive.median,
            self.random.median,
            self.adaptive.ci,
            self.random.ci,
        ) {
            (Some(a), Some(r), Some(ca), Some(cr)) => a < r && ca.disjoint_from(&cr),
            _ => false,
        }
    }
}

/// Runs `n_runs` agents from `agents` against both engines. Run `i` uses
/// engine seed `config.rng_seed + i` in both arms, so the arms differ only
/// in adaptation.
pub fn convergence_benchmark(
    agents: impl Fn(usize) -> AgentSpec,
    adaptive: &EngineConfig,
    random: &EngineConfig,
    map: &KnowledgeMap,
    bench: &BenchConfig,
) -> Result<BenchReport, SessionError> {
    let arm = |config: &EngineConfig, salt: u64| -> Result<ArmSummary, SessionError> {
        let mut values = Vec::with_capacity(bench.n_runs);
        let mut censored = 0;
        let mut violations = 0;
        for i in 0..bench.n_runs {
            let config = EngineConfig {
                rng_seed: config.rng_seed.wrapping_add(i as u64),
                ..config.clone()
            };
            let run = run_session(&agents(i), &config, map, &bench.run)?;
            violations += run.metrics.history_violations;
            let v = match run.metrics.iterations_to_target {
                Some(it) => it,
                None => {
                    censored += 1;
                    bench.run.max_iterations + 1
                }
            };
            values.push(v as f64);
        }
        Ok(ArmSummary {
            runs: bench.n_runs,
            censored,
            median: median(&values),
            ci: bootstrap_median_ci(&values, bench.resamples, bench.confidence, bench.seed ^ salt),
            iterations_to_target: values,
            history_violations: violations,
        })
    };
    Ok(BenchReport {
        adaptive: arm(adaptive, 0)?,
        random: arm(random, 1)?,
    })
}
