use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::Value;

use sandbox_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    NotFound,
    Conflict,
    Pending,
    InvalidConfig,
    EmptyReference,
    EmptyCorpus,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Conflict | ErrorCode::EmptyReference | ErrorCode::EmptyCorpus => StatusCode::CONFLICT,
            ErrorCode::Pending => StatusCode::TOO_EARLY,
            ErrorCode::InvalidConfig => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

/// JSON error body: `{"code": ..., "message": ..., "detail": ...}`.
#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::BadRequest, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (code, detail) = match e {
            Error::InvalidConfig(parse) => (ErrorCode::InvalidConfig, Some(serde_json::json!({ "diagnostics": parse.diagnostics }))),
            Error::EmptyCorpus => (ErrorCode::EmptyCorpus, None),
            Error::Pending => (ErrorCode::Pending, None),
            Error::EmptyReference => (ErrorCode::EmptyReference, None),
            Error::EmptyCollection | Error::EmptyDistribution | Error::NoConfig => (ErrorCode::Conflict, None),
            Error::UnknownPost(_) | Error::InvalidTrigger(_) => (ErrorCode::NotFound, None),
            Error::BadArgument { .. } | Error::Io(_) | Error::Json(_) => (ErrorCode::BadRequest, None),
            Error::Embedding(err) => (ErrorCode::Conflict, serde_json::to_value(&err).ok()),
        };
        ApiError { code, message, detail }
    }
}

impl From<sandbox_core::ParseError> for ApiError {
    fn from(e: sandbox_core::ParseError) -> Self {
        Error::InvalidConfig(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut res = (self.code.status(), Json(&self)).into_response();
        if self.code == ErrorCode::Pending {
            res.headers_mut().insert("retry-after", axum::http::HeaderValue::from_static("1"));
        }
        res
    }
}
