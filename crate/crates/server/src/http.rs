//! Routes. Request bodies are parsed by hand so that every malformed body
//! is a 400 with a JSON error, and the session cookie is issued on any
//! session route called without one.

use std::sync::Arc;

use adaptnav_core::Seconds;
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::header::{CONTENT_TYPE, COOKIE, SET_COOKIE};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::app::{App, Reply};
use crate::error::ApiError;

pub const SESSION_COOKIE: &str = "adaptnav_session";
pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocBody {
    doc_id: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PauseBody {
    paused: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalBody {
    secs: Seconds,
}

pub fn router(app: Arc<App>) -> Router {
    Router::new()
        .route("/set", get(get_set))
        .route("/click", post(click))
        .route("/favorite", post(add_favorite))
        .route("/favorite/{doc_id}", delete(remove_favorite))
        .route("/favorites", get(favorites))
        .route("/suggestions", get(suggestions))
        .route("/reset", post(reset))
        .route("/pause", post(pause))
        .route("/refresh_interval", post(refresh_interval))
        .route("/profile", get(profile))
        .route("/history", get(history))
        .route("/doc/{doc_id}", get(document))
        .route("/healthz", get(healthz))
        .with_state(app)
}

/// The session token from the `Cookie` header, if present.
pub fn session_token(headers: &HeaderMap) -> Option<String> {
    headers
        .get_all(COOKIE)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(';'))
        .filter_map(|pair| pair.trim().split_once('='))
        .find(|(name, _)| *name == SESSION_COOKIE)
        .map(|(_, value)| value.trim().to_string())
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("malformed body: {e}")))
}

fn respond<T: Serialize>(reply: Result<Reply<T>, ApiError>) -> Response {
    respond_with(reply, |body| Json(body).into_response())
}

fn respond_with<T>(reply: Result<Reply<T>, ApiError>, ok: impl FnOnce(T) -> Response) -> Response {
    let reply = match reply {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    let mut response = match reply.result {
        Ok(body) => ok(body),
        Err(e) => e.into_response(),
    };
    if reply.issued {
        let cookie = format!("{SESSION_COOKIE}={}; Path=/; HttpOnly; SameSite=Lax", reply.token);
        response
            .headers_mut()
            .insert(SET_COOKIE, HeaderValue::from_str(&cookie).expect("hex token is a valid header"));
    }
    response
}

async fn get_set(State(app): State<Arc<App>>, headers: HeaderMap) -> Response {
    respond(app.get_set(session_token(&headers).as_deref()).await)
}

async fn click(State(app): State<Arc<App>>, headers: HeaderMap, body: Bytes) -> Response {
    let body: DocBody = match parse(&body) {
        Ok(b) => b,
        Err(e) => return e.into_response(),
    };
    let key = headers.get(IDEMPOTENCY_HEADER).and_then(|v| v.to_str().ok());
    respond(app.click(session_token(&headers).as_deref(), &body.doc_id, key).await)
}

async fn add_favorite(State(app): State<Arc<App>>, headers: HeaderMap, body: Bytes) -> Response {
    match parse::<DocBody>(&body) {
        Ok(b) => respond(app.add_favorite(session_token(&headers).as_deref(), &b.doc_id).await),
        Err(e) => e.into_response(),
    }
}

async fn remove_favorite(State(app): State<Arc<App>>, headers: HeaderMap, Path(doc_id): Path<String>) -> Response {
    respond(app.remove_favorite(session_token(&headers).as_deref(), &doc_id).await)
}

async fn favorites(State(app): State<Arc<App>>, headers: HeaderMap) -> Response {
    respond(app.favorites(session_token(&headers).as_deref()).await)
}

async fn suggestions(State(app): State<Arc<App>>, headers: HeaderMap) -> Response {
    respond(app.suggestions(session_token(&headers).as_deref()).await)
}

async fn reset(State(app): State<Arc<App>>, headers: HeaderMap) -> Response {
    respond(app.reset(session_token(&headers).as_deref()).await)
}

async fn pause(State(app): State<Arc<App>>, headers: HeaderMap, body: Bytes) -> Response {
    match parse::<PauseBody>(&body) {
        Ok(b) => respond(app.pause(session_token(&headers).as_deref(), b.paused).await),
        Err(e) => e.into_response(),
    }
}

async fn refresh_interval(State(app): State<Arc<App>>, headers: HeaderMap, body: Bytes) -> Response {
    match parse::<IntervalBody>(&body) {
        Ok(b) => respond(app.set_refresh_interval(session_token(&headers).as_deref(), b.secs).await),
        Err(e) => e.into_response(),
    }
}

async fn profile(State(app): State<Arc<App>>, headers: HeaderMap) -> Response {
    respond(app.profile(session_token(&headers).as_deref()).await)
}

async fn history(State(app): State<Arc<App>>, headers: HeaderMap) -> Response {
    respond_with(app.history(session_token(&headers).as_deref()).await, |lines| {
        ([(CONTENT_TYPE, "application/x-ndjson")], lines).into_response()
    })
}

async fn document(State(app): State<Arc<App>>, Path(doc_id): Path<String>) -> Response {
    match app.document(&doc_id) {
        Ok(doc) => Json(doc).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn healthz(State(app): State<Arc<App>>) -> Response {
    (StatusCode::OK, Json(app.health())).into_response()
}
