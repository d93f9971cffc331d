//! In-process harness: the real router over a temporary store, driven
//! through `tower` with a manual clock and seeded session tokens.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use adaptnav_core::map::{build_map, BuildConfig};
use adaptnav_core::text::load_corpus;
use adaptnav_core::{KnowledgeMap, ManualClock};
use adaptnav_server::{http, App, ServiceConfig, Store};
use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub const T0: u64 = 1_000_000;

pub fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthetic-200.jsonl")
}

pub fn map() -> Arc<KnowledgeMap> {
    static MAP: OnceLock<Arc<KnowledgeMap>> = OnceLock::new();
    MAP.get_or_init(|| {
        let docs = load_corpus(&fixture_path()).expect("fixture corpus");
        Arc::new(build_map(docs, &BuildConfig::default()).expect("fixture map").0)
    })
    .clone()
}

pub struct Harness {
    pub app: Arc<App>,
    pub router: Router,
    pub clock: Arc<ManualClock>,
    _dir: Option<tempfile::TempDir>,
}

impl Harness {
    pub fn new(config: ServiceConfig) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store = dir.path().join("store.redb");
        let mut h = Self::on_store(config, &store, 7);
        h._dir = Some(dir);
        h
    }

    /// A service over an existing store file, as after a restart.
    pub fn on_store(config: ServiceConfig, store: &Path, token_seed: u64) -> Self {
        let clock = Arc::new(ManualClock::new(T0));
        let app = App::new(map(), config, Store::open(store).unwrap(), clock.clone(), Some(token_seed)).unwrap();
        Self {
            router: http::router(app.clone()),
            app,
            clock,
            _dir: None,
        }
    }

    pub fn client(&self) -> Client {
        Client {
            router: self.router.clone(),
            cookie: None,
        }
    }

    /// Moves the clock and runs the periodic algorithm, as the ticker does.
    pub async fn advance(&self, secs: u64) {
        self.clock.advance(secs);
        self.app.tick().await.unwrap();
    }
}

#[derive(Debug, Clone)]
pub struct Reply {
    pub status: StatusCode,
    pub set_cookie: Option<String>,
    pub body: Value,
}

/// A browser-like client that keeps the session cookie it is given.
#[derive(Clone)]
pub struct Client {
    router: Router,
    pub cookie: Option<String>,
}

impl Client {
    pub async fn send(&mut self, method: Method, path: &str, body: Option<&str>, extra: &[(&str, &str)]) -> Reply {
        let mut req = Request::builder().method(method).uri(path);
        if let Some(c) = &self.cookie {
            req = req.header(header::COOKIE, format!("{}={c}", http::SESSION_COOKIE));
        }
        for (k, v) in extra {
            req = req.header(*k, *v);
        }
        let req = match body {
            Some(b) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let set_cookie = resp
            .headers()
            .get(header::SET_COOKIE)
            .map(|v| v.to_str().unwrap().to_string());
        if let Some(c) = &set_cookie {
            let token = c
                .split(';')
                .next()
                .and_then(|kv| kv.split_once('='))
                .map(|(_, v)| v.to_string())
                .unwrap();
            self.cookie = Some(token);
        }
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let body = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
        };
        Reply {
            status,
            set_cookie,
            body,
        }
    }

    pub async fn get(&mut self, path: &str) -> Reply {
        self.send(Method::GET, path, None, &[]).await
    }

    pub async fn post(&mut self, path: &str, body: &str) -> Reply {
        self.send(Method::POST, path, Some(body), &[]).await
    }

    pub async fn delete(&mut self, path: &str) -> Reply {
        self.send(Method::DELETE, path, None, &[]).await
    }

    pub async fn click(&mut self, doc_id: &str) -> Reply {
        self.post("/click", &format!(r#"{{"doc_id":"{doc_id}"}}"#)).await
    }

    pub async fn favorite(&mut self, doc_id: &str) -> Reply {
        self.post("/favorite", &format!(r#"{{"doc_id":"{doc_id}"}}"#)).await
    }
}

pub fn entry_ids(set: &Value) -> Vec<String> {
    set["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["doc_id"].as_str().unwrap().to_string())
        .collect()
}

pub fn fitness_of(set: &Value, doc_id: &str) -> Option<u64> {
    set["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["doc_id"] == doc_id)
        .map(|e| e["fitness"].as_u64().unwrap())
}

/// A document that is in neither the set nor the favorites.
pub fn outside(set: &Value) -> String {
    let ids = entry_ids(set);
    (0..map().size())
        .map(|i| map().document(adaptnav_core::DocIdx(i as u32)).id.clone())
        .find(|id| !ids.contains(id))
        .unwrap()
}
