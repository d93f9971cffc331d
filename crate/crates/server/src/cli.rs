//! The `adaptnav` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaptnav_core::engine::EngineConfig;
use adaptnav_core::map::{build_map, BuildConfig, DimensionChoice};
use adaptnav_core::sim::{
    convergence_benchmark, correlation_study, generate_corpus, label_of, run_session, AgentSpec, BenchConfig,
    Behavior, GroundTruth, RunConfig, SyntheticConfig,
};
use adaptnav_core::text::{load_corpus, StopList};
use adaptnav_core::{ClusterId, KnowledgeMap};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::ServiceConfig;

#[derive(Debug, Parser)]
#[command(name = "adaptnav", version, about = "Adaptive navigation over a compressed document space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a map file from a corpus.
    Build(BuildArgs),
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulations over virtual time.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Write the synthetic topic corpus as JSON lines.
    Fixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// JSON-lines file or directory of documents.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Fixed number of principal axes.
    #[arg(long, conflicts_with = "variance")]
    pub dim: Option<usize>,
    /// Cumulative-variance threshold for the intrinsic dimensionality.
    #[arg(long)]
    pub variance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of clusters; must equal the service's set_size.
    #[arg(long, default_value_t = 10)]
    pub clusters: usize,
    /// Stop-word file (one word per line) replacing the built-in list.
    #[arg(long)]
    pub stop_words: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// One agent, one session; writes a JSON-lines trace and metrics.
    Run(RunArgs),
    /// Adaptive versus random-only engine over many seeker runs.
    Bench(BenchArgs),
    /// Distance correlation between compressed and full spaces.
    Corr(CorrArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BehaviorArg {
    Seeker,
    Switcher,
    Random,
    Multi,
    Idle,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Service config file; only its engine keys are used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub iterations: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_enum, default_value = "seeker")]
    pub behavior: BehaviorArg,
    /// Target cluster(s); the switcher's second target follows the first.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub target: Vec<u32>,
    #[arg(long, default_value_t = 20)]
    pub switch_at: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Every n-th click also adds a favorite.
    #[arg(long)]
    pub favorite_every: Option<u32>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, default_value_t = 200)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TruthArg {
    /// Distances in the uncompressed tf.idf space.
    Full,
    /// Same-topic pairs are relevant; needs synthetic ids.
    Labels,
}

#[derive(Debug, Args)]
pub struct CorrArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2,3,10,50")]
    pub dims: Vec<usize>,
    #[arg(long, value_enum, default_value = "full")]
    pub truth: TruthArg,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Build(args) => build(&args),
        Command::Serve { config } => {
            let config = ServiceConfig::load(&config)?;
            tokio::runtime::Runtime::new()?.block_on(crate::serve(config))
        }
        Command::Sim(SimCommand::Run(args)) => sim_run(&args),
        Command::Sim(SimCommand::Bench(args)) => sim_bench(&args),
        Command::Sim(SimCommand::Corr(args)) => sim_corr(&args),
        Command::Fixture { out, seed } => fixture(&out, seed),
    }
}

fn build(args: &BuildArgs) -> anyhow::Result<()> {
    let docs = load_corpus(&args.corpus).with_context(|| format!("loading {}", args.corpus.display()))?;
    let dims = match (args.dim, args.variance) {
        (Some(d), _) => DimensionChoice::Fixed(d),
        (None, Some(t)) => DimensionChoice::Variance(t),
        (None, None) => DimensionChoice::default(),
    };
    let stop_list = match &args.stop_words {
        Some(p) => StopList::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => StopList::english(),
    };
    let config = BuildConfig {
        dims,
        clusters: args.clusters,
        seed: args.seed,
        stop_list,
    };
    let (map, report) = build_map(docs, &config)?;
    map.save(&args.out)?;
    println!("corpus size:        {}", report.corpus_size);
    println!("vocabulary size:    {}", report.vocabulary_size);
    println!("dimensionality:     {}", report.dimensionality);
    println!("intrinsic (0.90):   {}", report.intrinsic_dimensionality);
    println!("explained variance: {:.4}", report.explained_variance_ratio);
    println!("cluster sizes:      {:?}", report.cluster_sizes);
    if !report.zero_vector_docs.is_empty() {
        println!("zero vectors:       {:?}", report.zero_vector_docs);
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn engine_config(args: &EngineArgs) -> anyhow::Result<EngineConfig> {
    Ok(match &args.config {
        Some(p) => ServiceConfig::load(p)?.engine,
        None => EngineConfig::default(),
    })
}

fn load_map(path: &Path) -> anyhow::Result<KnowledgeMap> {
    KnowledgeMap::load(path).with_context(|| format!("loading map {}", path.display()))
}

fn sim_run(args: &RunArgs) -> anyhow::Result<()> {
    let map = load_map(&args.engine.map)?;
    let config = engine_config(&args.engine)?;
    let targets: Vec<ClusterId> = args.target.iter().map(|&c| ClusterId(c)).collect();
    if let Some(bad) = targets.iter().find(|c| c.index() >= map.n_clusters()) {
        bail!("cluster {} outside 0..{}", bad.0, map.n_clusters());
    }
    let behavior = match args.behavior {
        BehaviorArg::Seeker => Behavior::TopicSeeker { target: targets[0] },
        BehaviorArg::Switcher => {
            let Some(&to) = targets.get(1) else {
                bail!("the switcher needs two targets, e.g. --target 2,7");
            };
            Behavior::TopicSwitcher {
                from: targets[0],
                to,
                switch_at_iteration: args.switch_at,
            }
        }
        BehaviorArg::Random => Behavior::RandomClicker,
        BehaviorArg::Multi => Behavior::MultiInterest { clusters: targets },
        BehaviorArg::Idle => Behavior::Idle,
    };
    let agent = AgentSpec {
        behavior,
        seed: args.seed,
        favorite_every: args.favorite_every,
        ..AgentSpec::default()
    };
    let run = RunConfig {
        max_iterations: args.engine.iterations,
        ..RunConfig::default()
    };
    let result = run_session(&agent, &config, &map, &run)?;
    fs::create_dir_all(&args.engine.out)?;
    let mut trace = std::io::BufWriter::new(fs::File::create(args.engine.out.join("trace.jsonl"))?);
    for event in &result.trace {
        serde_json::to_writer(&mut trace, event)?;
        trace.write_all(b"\n")?;
    }
    trace.flush()?;
    fs::write(
        args.engine.out.join("metrics.json"),
        serde_json::to_string_pretty(&result.metrics)?,
    )?;
    println!("{}", serde_json::to_string(&result.metrics)?);
    Ok(())
}

fn sim_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let map = load_map(&args.engine.map)?;
    let adaptive = engine_config(&args.engine)?;
    let random = EngineConfig {
        random_only: true,
        ..adaptive.clone()
    };
    let k = map.n_clusters();
    let bench = BenchConfig {
        n_runs: args.runs,
        run: RunConfig {
            max_iterations: args.engine.iterations,
            keep_trace: false,
            ..RunConfig::default()
        },
        seed: args.seed,
        ..BenchConfig::default()
    };
    let seed = args.seed;
    let report = convergence_benchmark(
        |i| AgentSpec::seeker(ClusterId((i % k) as u32), seed.wrapping_add(i as u64)),
        &adaptive,
        &random,
        &map,
        &bench,
    )?;
    fs::create_dir_all(&args.engine.out)?;
    fs::write(args.engine.out.join("bench.json"), serde_json::to_string_pretty(&report)?)?;
    let mut csv = String::from("arm,run,iterations_to_target\n");
    for (arm, summary) in [("adaptive", &report.adaptive), ("random", &report.random)] {
        for (i, v) in summary.iterations_to_target.iter().enumerate() {
            csv.push_str(&format!("{arm},{i},{v}\n"));
        }
    }
    fs::write(args.engine.out.join("bench.csv"), csv)?;
    for (arm, s) in [("adaptive", &report.adaptive), ("random", &report.random)] {
        println!(
            "{arm:8} runs {} censored {} median {:?} ci {:?}",
            s.runs, s.censored, s.median, s.ci
        );
    }
    println!("adaptive wins: {}", report.adaptive_wins());
    Ok(())
}

fn sim_corr(args: &CorrArgs) -> anyhow::Result<()> {
    let docs = load_corpus(&args.corpus).with_context(|| format!("loading {}", args.corpus.display()))?;
    let mut docs = docs;
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    let truth = match args.truth {
        TruthArg::Full => GroundTruth::FullSpace,
        TruthArg::Labels => {
            let labels: Option<Vec<usize>> = docs.iter().map(label_of).collect();
            let Some(labels) = labels else {
                bail!("--truth labels needs synthetic documents with topic URIs");
            };
            GroundTruth::TopicLabels(labels)
        }
    };
    let study = correlation_study(&docs, &args.dims, &truth, &StopList::english())?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("corr.csv"), study.to_csv())?;
    fs::write(
        args.out.join("corr_chart.json"),
        serde_json::to_string_pretty(&study.chart_json())?,
    )?;
    print!("{}", study.to_csv());
    Ok(())
}

fn fixture(out: &Path, seed: u64) -> anyhow::Result<()> {
    let corpus = generate_corpus(&SyntheticConfig {
        seed,
        ..SyntheticConfig::default()
    });
    let mut text = String::new();
    for d in &corpus.documents {
        text.push_str(&serde_json::to_string(d)?);
        text.push('\n');
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(out, text)?;
    println!("wrote {} documents to {}", corpus.documents.len(), out.display());
    Ok(())
}
