use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use invlearn_core::model::Finding;
use invlearn_core::solvers::SolveError;
use invlearn_diet::DietError;
use serde::{Deserialize, Serialize};

/// The JSON body of every error response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub findings: Vec<Finding>,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("problem failed validation")]
    Invalid(Vec<Finding>),
    #[error("{message}")]
    Unprocessable { code: &'static str, message: String },
    #[error("{message}")]
    Json { status: StatusCode, message: String },
    #[error("no pending step to accept")]
    NothingPending,
    #[error("step would break the accepted trace: {0}")]
    Invariant(String),
    #[error(transparent)]
    Solve(SolveError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn unprocessable(code: &'static str, message: impl Into<String>) -> Self {
        Self::Unprocessable { code, message: message.into() }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            Self::UnknownSession(_) => StatusCode::NOT_FOUND,
            Self::Invalid(_) | Self::Unprocessable { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            Self::Json { status, .. } => *status,
            Self::NothingPending | Self::Invariant(_) | Self::Solve(_) => StatusCode::CONFLICT,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownSession(_) => "unknown_session",
            Self::Invalid(_) => "invalid_problem",
            Self::Unprocessable { code, .. } => code,
            Self::Json { .. } => "invalid_json",
            Self::NothingPending => "nothing_pending",
            Self::Invariant(_) => "invariant_violation",
            Self::Solve(e) => e.code(),
            Self::Internal(_) => "internal",
        }
    }

    pub fn body(&self) -> ErrorBody {
        let findings = match self {
            Self::Invalid(f) => f.clone(),
            _ => Vec::new(),
        };
        ErrorBody { code: self.code().into(), message: self.to_string(), findings }
    }
}

impl From<SolveError> for ApiError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Invalid(findings) => Self::Invalid(findings),
            SolveError::Config(message) => Self::Unprocessable { code: "invalid_config", message },
            e => Self::Solve(e),
        }
    }
}

impl From<DietError> for ApiError {
    fn from(e: DietError) -> Self {
        let code = match e {
            DietError::UnknownPreset(_) => "unknown_regimen",
            DietError::Config(_) => "invalid_regimen",
            _ => "invalid_diet",
        };
        Self::unprocessable(code, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::Json { status: e.status(), message: e.body_text() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if let Self::Internal(msg) = &self {
            tracing::error!("{msg}");
        }
        (self.status(), Json(self.body())).into_response()
    }
}
