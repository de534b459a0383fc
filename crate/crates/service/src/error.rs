use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use certainty_core::audio::AudioError;
use serde::Serialize;
use thiserror::Error;

use crate::store::ExportReport;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("unknown or empty item set `{0}`")]
    UnknownItemSet(String),
    #[error("item {0} is not part of this session")]
    UnknownItem(String),
    #[error("{event} is not allowed for item {item_id} in state {state}")]
    IllegalTransition {
        item_id: String,
        state: String,
        event: String,
    },
    #[error("rating {0} is outside 1..=5")]
    RatingOutOfRange(i64),
    #[error("recording rejected: {0}")]
    AudioRejected(#[from] AudioError),
    #[error("utterance {0} is already rated in this session")]
    DuplicateRating(String),
    #[error("utterance {0} is not in this playlist")]
    UnknownUtterance(String),
    #[error("invalid alignment: {0}")]
    InvalidAlignment(String),
    #[error("session {0} is not of the kind this request needs")]
    WrongKind(String),
    #[error("export refused: the study is incomplete")]
    ExportIncomplete(ExportReport),
    #[error("exported manifest does not validate: {0}")]
    InvalidExport(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("storage: {0}")]
    Storage(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownSession(_) => "unknown_session",
            Self::UnknownItemSet(_) => "unknown_item_set",
            Self::UnknownItem(_) => "unknown_item",
            Self::IllegalTransition { .. } => "illegal_transition",
            Self::RatingOutOfRange(_) => "rating_out_of_range",
            Self::AudioRejected(_) => "audio_rejected",
            Self::DuplicateRating(_) => "duplicate_rating",
            Self::UnknownUtterance(_) => "unknown_utterance",
            Self::InvalidAlignment(_) => "invalid_alignment",
            Self::WrongKind(_) => "wrong_session_kind",
            Self::InvalidRequest(_) => "invalid_request",
            Self::ExportIncomplete(_) => "export_incomplete",
            Self::InvalidExport(_) => "invalid_export",
            Self::Config(_) => "invalid_configuration",
            Self::Storage(_) => "storage",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            Self::UnknownSession(_) | Self::UnknownItem(_) | Self::UnknownUtterance(_) => StatusCode::NOT_FOUND,
            Self::IllegalTransition { .. } | Self::DuplicateRating(_) | Self::ExportIncomplete(_) => {
                StatusCode::CONFLICT
            }
            Self::UnknownItemSet(_)
            | Self::RatingOutOfRange(_)
            | Self::AudioRejected(_)
            | Self::InvalidAlignment(_)
            | Self::WrongKind(_)
            | Self::InvalidRequest(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Self::InvalidExport(_) | Self::Config(_) | Self::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub(crate) fn storage(e: impl std::fmt::Display) -> Self {
        Self::Storage(e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a ExportReport>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let report = match &self {
            Self::ExportIncomplete(r) => Some(r),
            _ => None,
        };
        let body = ErrorBody {
            error: self.code(),
            message: self.to_string(),
            report,
        };
        (self.status(), Json(body)).into_response()
    }
}
