use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use certainty_core::corpus::Manifest;
use serde::{Deserialize, Serialize};

use crate::session::{
    AnnotationSession, ElicitationEvent, ElicitationSession, ItemProgress, ItemState, BEEP_OFFSET,
};
use crate::store::{Session, Store};
use crate::ServiceError;

/// Largest accepted recording upload.
pub const MAX_RECORDING_BYTES: usize = 64 * 1024 * 1024;

pub type AppState = Arc<Store>;

pub fn router(store: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", post(post_event))
        .route(
            "/sessions/{id}/recordings/{item_id}",
            put(put_recording).layer(DefaultBodyLimit::max(MAX_RECORDING_BYTES)),
        )
        .route("/sessions/{id}/ratings", post(post_rating))
        .route("/audio/{utterance_id}", get(get_audio))
        .route("/export/manifest", get(export_manifest))
        .with_state(store)
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CreateSession {
    Elicitation {
        speaker_id: String,
        item_set: String,
        #[serde(default)]
        seed: u64,
    },
    Annotation {
        judge_id: String,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Serialize)]
pub struct CurrentItem {
    pub item_id: String,
    pub state: ItemState,
}

#[derive(Debug, Serialize)]
pub struct ElicitationView {
    pub session_id: String,
    pub kind: &'static str,
    pub speaker_id: String,
    pub item_set: String,
    pub seed: u64,
    pub order: Vec<String>,
    pub current: Option<CurrentItem>,
    pub complete: bool,
    pub flagged: bool,
    pub items: Vec<ItemProgress>,
}

impl From<ElicitationSession> for ElicitationView {
    fn from(s: ElicitationSession) -> Self {
        Self {
            kind: "elicitation",
            order: s.order().into_iter().map(String::from).collect(),
            current: s.current().map(|p| CurrentItem {
                item_id: p.item_id.clone(),
                state: p.state,
            }),
            complete: s.current().is_none(),
            flagged: s.flagged(),
            session_id: s.session_id,
            speaker_id: s.speaker_id,
            item_set: s.item_set,
            seed: s.seed,
            items: s.items,
        }
    }
}

/// What a judge sees: audio references only, never item text or options.
#[derive(Debug, Serialize)]
pub struct PlaylistEntry {
    pub utterance_id: String,
    pub audio: String,
    pub rated: bool,
}

#[derive(Debug, Serialize)]
pub struct AnnotationView {
    pub session_id: String,
    pub kind: &'static str,
    pub judge_id: String,
    pub seed: u64,
    pub playlist: Vec<PlaylistEntry>,
    pub rated: usize,
    pub remaining: usize,
}

impl From<AnnotationSession> for AnnotationView {
    fn from(s: AnnotationSession) -> Self {
        let playlist: Vec<PlaylistEntry> = s
            .playlist
            .iter()
            .map(|u| PlaylistEntry {
                utterance_id: u.clone(),
                audio: format!("/audio/{u}"),
                rated: s.ratings.contains_key(u),
            })
            .collect();
        Self {
            kind: "annotation",
            rated: s.ratings.len(),
            remaining: playlist.len() - s.ratings.len(),
            playlist,
            session_id: s.session_id,
            judge_id: s.judge_id,
            seed: s.seed,
        }
    }
}

fn view(session: Session) -> Response {
    match session {
        Session::Elicitation(s) => Json(ElicitationView::from(s)).into_response(),
        Session::Annotation(s) => Json(AnnotationView::from(s)).into_response(),
    }
}

async fn create_session(State(store): State<AppState>, Json(req): Json<CreateSession>) -> Result<Response, ServiceError> {
    let session = match req {
        CreateSession::Elicitation {
            speaker_id,
            item_set,
            seed,
        } => store.create_elicitation(&speaker_id, &item_set, seed)?,
        CreateSession::Annotation { judge_id, seed } => store.create_annotation(&judge_id, seed)?,
    };
    Ok((StatusCode::CREATED, view(session)).into_response())
}

async fn get_session(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(view(store.snapshot(&id)?))
}

#[derive(Debug, Serialize, Default)]
pub struct EventOutcome {
    pub item_id: String,
    pub state: Option<ItemState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<Vec<String>>>,
    /// Seconds after reveal at which the client must play the beep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beep_offset_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beep_flagged: Option<bool>,
    pub next_item: Option<String>,
}

async fn post_event(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Json(event): Json<ElicitationEvent>,
) -> Result<Json<EventOutcome>, ServiceError> {
    let session = store.apply_event(&id, event.clone())?;
    let item_id = event.item_id().to_string();
    let progress = session.progress(&item_id)?;
    let item = store
        .item(&item_id)
        .ok_or_else(|| ServiceError::UnknownItem(item_id.clone()))?;
    let mut out = EventOutcome {
        state: Some(progress.state),
        next_item: session.current().map(|p| p.item_id.clone()),
        ..EventOutcome::default()
    };
    match event {
        ElicitationEvent::ShowContext { .. } => out.context_text = Some(item.context_text.clone()),
        ElicitationEvent::RevealTargets { .. } => {
            out.options = Some(item.options.clone());
            out.beep_offset_s = Some(BEEP_OFFSET);
        }
        ElicitationEvent::BeepPlayed { .. } => out.beep_flagged = Some(progress.beep_flagged),
        ElicitationEvent::SubmitSelfRating { .. } | ElicitationEvent::Transcribe { .. } => {}
    }
    out.item_id = item_id;
    Ok(Json(out))
}

async fn put_recording(
    State(store): State<AppState>,
    Path((id, item_id)): Path<(String, String)>,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let recording = store.upload_recording(&id, &item_id, &body)?;
    Ok((StatusCode::CREATED, Json(recording)).into_response())
}

#[derive(Debug, Deserialize)]
pub struct RatingRequest {
    pub utterance_id: String,
    pub rating: i64,
}

#[derive(Debug, Serialize)]
pub struct RatingOutcome {
    pub utterance_id: String,
    pub rating: i64,
    pub rated: usize,
    pub remaining: usize,
}

async fn post_rating(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<RatingRequest>,
) -> Result<Json<RatingOutcome>, ServiceError> {
    let session = store.rate(&id, &req.utterance_id, req.rating)?;
    Ok(Json(RatingOutcome {
        utterance_id: req.utterance_id,
        rating: req.rating,
        rated: session.ratings.len(),
        remaining: session.playlist.len() - session.ratings.len(),
    }))
}

async fn get_audio(State(store): State<AppState>, Path(utterance_id): Path<String>) -> Result<Response, ServiceError> {
    let bytes = store.audio(&utterance_id)?;
    Ok(([(header::CONTENT_TYPE, "audio/wav")], bytes).into_response())
}

async fn export_manifest(State(store): State<AppState>) -> Result<Json<Manifest>, ServiceError> {
    Ok(Json(store.export_manifest()?))
}
