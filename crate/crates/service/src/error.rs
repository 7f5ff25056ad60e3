use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use flimreg_core::Error as EngineError;
use serde::{Deserialize, Serialize};

/// JSON error body: `{code, message, field?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

pub type ApiResult<T> = Result<T, ApiError>;

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, body: ErrorBody { code: code.into(), message: message.into(), field: None } }
    }

    pub fn with_field(mut self, field: &str) -> Self {
        self.body.field = Some(field.into());
        self
    }

    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "ValidationError", message).with_field(field)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    pub fn unknown(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, &format!("Unknown{what}"), format!("no {} `{id}`", what.to_lowercase()))
    }

    pub fn job_not_done(id: &str) -> Self {
        Self::new(StatusCode::CONFLICT, "JobNotDone", format!("job `{id}` has not finished successfully"))
    }

    pub fn persist(err: EngineError) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "PersistFailure", err.to_string())
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let status = match &e {
            EngineError::Io { .. } | EngineError::Image(_) | EngineError::Json(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let field = match &e {
            EngineError::InvalidParameter { field, .. } => Some(*field),
            EngineError::RectOutOfBounds(_) => Some("patch"),
            EngineError::InvalidWindow(_) => Some("window"),
            EngineError::BandOutOfRange { .. } => Some("band"),
            EngineError::WindowTooLarge { .. } => Some("smooth_window"),
            _ => None,
        };
        let mut err = ApiError::new(status, e.code(), e.to_string());
        err.body.field = field.map(str::to_string);
        err
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.body.code, self.body.message)
    }
}
