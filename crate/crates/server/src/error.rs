use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use hoport_core::matcher::MatchError;
use hoport_core::rewrite::RewriteError;
use hoport_core::GraphDigest;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("malformed request: {0}")]
    Malformed(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    SignatureMismatch(String),
    #[error("no session `{0}`")]
    UnknownSession(String),
    #[error("redex list is stale: graph digest is {expected}, request names {found}")]
    Stale { expected: GraphDigest, found: GraphDigest },
    #[error("redex index {index} out of range ({len} redexes)")]
    BadIndex { index: usize, len: usize },
    #[error("nothing to undo")]
    EmptyHistory,
    #[error(transparent)]
    Rewrite(RewriteError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::Malformed(_) => "Malformed",
            ApiError::Invalid(_) => "Invalid",
            ApiError::SignatureMismatch(_) => "SignatureMismatch",
            ApiError::UnknownSession(_) => "UnknownSession",
            ApiError::Stale { .. } => "Stale",
            ApiError::BadIndex { .. } => "BadIndex",
            ApiError::EmptyHistory => "EmptyHistory",
            ApiError::Rewrite(RewriteError::LinearityOverflow(_)) => "LinearityOverflow",
            ApiError::Rewrite(_) => "Rewrite",
            ApiError::Match(MatchError::Timeout { .. }) => "Timeout",
            ApiError::Match(_) => "Match",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Malformed(_)
            | ApiError::Invalid(_)
            | ApiError::SignatureMismatch(_)
            | ApiError::BadIndex { .. } => StatusCode::BAD_REQUEST,
            ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::Stale { .. } | ApiError::EmptyHistory => StatusCode::CONFLICT,
            ApiError::Rewrite(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Match(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.code(), "detail": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}
