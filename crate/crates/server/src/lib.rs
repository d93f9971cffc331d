//! HTTP service, persistence and command line for the adaptive navigation
//! engine.
//!
//! [`App`] owns the live sessions; [`http::router`] exposes them as JSON
//! endpoints; [`serve`] adds the once-a-second periodic algorithm, the
//! social recomputation and graceful shutdown.

pub mod app;
pub mod cli;
pub mod config;
pub mod error;
pub mod http;
pub mod store;
pub mod views;

use std::sync::Arc;
use std::time::Duration;

use adaptnav_core::map::{build_map, BuildConfig};
use adaptnav_core::text::load_corpus;
use adaptnav_core::{KnowledgeMap, SystemClock};
use anyhow::{bail, Context};
use log::{error, info};
use tokio::task::JoinHandle;
use tokio::time::{interval, interval_at, Instant, MissedTickBehavior};

pub use app::App;
pub use config::ServiceConfig;
pub use error::ApiError;
pub use store::{ProfileRecord, Store};

/// Loads the configured map, building it from the configured corpus when
/// the map file does not exist yet.
pub fn load_or_build_map(config: &ServiceConfig) -> anyhow::Result<KnowledgeMap> {
    if config.map.exists() {
        let map = KnowledgeMap::load(&config.map).with_context(|| format!("loading map {}", config.map.display()))?;
        if map.n_clusters() != config.engine.set_size {
            bail!(
                "map has {} clusters but set_size is {}",
                map.n_clusters(),
                config.engine.set_size
            );
        }
        return Ok(map);
    }
    let Some(corpus) = &config.corpus else {
        bail!("map file {} does not exist and no corpus is configured", config.map.display());
    };
    info!("map {} missing; building from {}", config.map.display(), corpus.display());
    let docs = load_corpus(corpus).with_context(|| format!("loading corpus {}", corpus.display()))?;
    let build = BuildConfig {
        clusters: config.engine.set_size,
        seed: config.engine.rng_seed,
        ..BuildConfig::default()
    };
    let (map, _) = build_map(docs, &build)?;
    map.save(&config.map)?;
    Ok(map)
}

/// Starts the periodic tasks: every session's periodic algorithm once a
/// second, and the social recomputation every `social_recompute_period`.
pub fn spawn_background(app: Arc<App>) -> Vec<JoinHandle<()>> {
    let ticker = {
        let app = app.clone();
        tokio::spawn(async move {
            let mut every = interval(Duration::from_secs(1));
            every.set_missed_tick_behavior(MissedTickBehavior::Skip);
            loop {
                every.tick().await;
                if let Err(e) = app.tick().await {
                    error!("tick failed: {e}");
                }
            }
        })
    };
    let social = tokio::spawn(async move {
        let period = Duration::from_secs(app.config().social_recompute_period);
        let mut every = interval_at(Instant::now() + period, period);
        every.set_missed_tick_behavior(MissedTickBehavior::Delay);
        loop {
            every.tick().await;
            match app.recompute_social().await {
                Ok(n) => info!("social WPIs recomputed for {n} users"),
                Err(e) => error!("social recomputation failed: {e}"),
            }
        }
    });
    vec![ticker, social]
}

/// Runs the service until interrupted, then writes back every live
/// session.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let map = Arc::new(load_or_build_map(&config)?);
    let store = Store::open(&config.store).with_context(|| format!("opening store {}", config.store.display()))?;
    let listener = tokio::net::TcpListener::bind(&config.listen)
        .await
        .with_context(|| format!("binding {}", config.listen))?;
    let app = App::new(map, config, store, Arc::new(SystemClock), None)?;
    let tasks = spawn_background(app.clone());
    let addr = listener.local_addr()?;
    info!("listening on {addr}");
    // scripts read the bound address from stdout
    println!("listening on http://{addr}");
    axum::serve(listener, http::router(app.clone()))
        .with_graceful_shutdown(shutdown_signal())
        .await?;
    for t in tasks {
        t.abort();
    }
    app.tick().await?;
    info!("shut down cleanly");
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}
