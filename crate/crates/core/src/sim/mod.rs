//! Deterministic simulation: synthetic corpora and users, scripted agents
//! driving sessions under virtual time, the adaptive-versus-random
//! benchmark, and the compression-fidelity correlation study.

mod agent;
mod bench;
mod corr;
mod population;
mod run;
pub mod stats;
mod synthetic;

pub use agent::{ActivityCycle, Agent, AgentSpec, Behavior};
pub use bench::{convergence_benchmark, ArmSummary, BenchConfig, BenchReport};
pub use corr::{correlation_study, CorrRow, CorrStudy, GroundTruth};
pub use population::synthetic_population;
pub use run::{run_session, RunConfig, RunMetrics, SimRun};
pub use synthetic::{generate as generate_corpus, label_of, SyntheticConfig, SyntheticCorpus, TermDistribution};
