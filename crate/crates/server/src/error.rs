use adaptnav_core::engine::EngineError;
use adaptnav_core::session::SessionError;
use adaptnav_core::user::UserError;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use thiserror::Error;

use crate::store::StoreError;
use crate::views::ErrorView;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("unknown document `{0}`")]
    UnknownDocument(String),
    /// Well-formed request that conflicts with the session's state.
    #[error("{message}")]
    Conflict { code: &'static str, message: String },
    #[error("session is unknown or has expired")]
    SessionExpired,
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            Self::BadRequest(_) => StatusCode::BAD_REQUEST,
            Self::UnknownDocument(_) => StatusCode::NOT_FOUND,
            Self::Conflict { .. } => StatusCode::CONFLICT,
            Self::SessionExpired => StatusCode::GONE,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::BadRequest(_) => "bad_request",
            Self::UnknownDocument(_) => "unknown_document",
            Self::Conflict { code, .. } => code,
            Self::SessionExpired => "session_expired",
            Self::Internal(_) => "internal",
        }
    }

    pub fn view(&self) -> ErrorView {
        ErrorView {
            error: self.code().to_string(),
            message: self.to_string(),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::Engine(EngineError::NotInSet(_)) => Self::Conflict {
                code: "not_in_set",
                message,
            },
            SessionError::User(UserError::AlreadyFavorite(_)) => Self::Conflict {
                code: "already_favorite",
                message,
            },
            SessionError::User(UserError::NotAFavorite(_)) => Self::Conflict {
                code: "not_a_favorite",
                message,
            },
            SessionError::User(UserError::UnknownDocument(_)) => Self::UnknownDocument(message),
            SessionError::InvalidRefreshInterval { .. } => Self::BadRequest(message),
            SessionError::Engine(_) => Self::Internal(message),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        Self::Internal(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self.view())).into_response()
    }
}
