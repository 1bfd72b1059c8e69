//! Axum routes under `/api/v1`. Handlers extract the token, hand off to
//! [`Platform`] on a blocking thread and map its errors to status codes.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

use debugscope_core::stats::GroupBy;
use debugscope_core::{QuestionId, SessionId, TicketId};

use crate::platform::{Platform, PlatformError};
use crate::wire::{
    decode_snapshot, AnswerRequest, CheckRequest, EndRequest, ErrorBody, EventRecorded, EventRequest,
    LoginRequest, LoginResponse, QuestionCreated, QuestionDraft, ResumeRequest, SnapshotBody,
    StartSessionRequest, TicketCreated, TicketRequest,
};

pub const API_BASE: &str = "/api/v1";

impl PlatformError {
    pub fn status(&self) -> StatusCode {
        use PlatformError::*;
        match self {
            Unauthenticated | AuthFailed | AuthExpired => StatusCode::UNAUTHORIZED,
            Forbidden(_) | NotOwner | RankDisabled => StatusCode::FORBIDDEN,
            QuestionNotFound(_) | SessionNotFound(_) | TicketNotFound(_) | NothingToResume => StatusCode::NOT_FOUND,
            SessionExists(_) | ResumeAvailable(_) | SessionNotActive(_) | AlreadyEnded | NoSnapshotYet
            | TicketNotOpen => StatusCode::CONFLICT,
            MissingSnapshot | BadRequest(_) => StatusCode::BAD_REQUEST,
            ReferenceUnparseable(_) | NoSeededError => StatusCode::UNPROCESSABLE_ENTITY,
            Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for PlatformError {
    fn into_response(self) -> Response {
        let session_id = match &self {
            PlatformError::SessionExists(id) | PlatformError::ResumeAvailable(id) => Some(id.clone()),
            _ => None,
        };
        if let PlatformError::Store(e) = &self {
            tracing::error!(error = %e, "store failure");
        }
        let body = ErrorBody {
            error: self.code().to_string(),
            message: self.to_string(),
            session_id,
        };
        (self.status(), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, PlatformError>;

/// Accepts both the bare hex token and `Bearer <hex>`.
fn token(headers: &HeaderMap) -> Result<String, PlatformError> {
    let raw = headers
        .get(axum::http::header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .ok_or(PlatformError::Unauthenticated)?
        .trim();
    let t = raw.strip_prefix("Bearer ").unwrap_or(raw).trim();
    if t.is_empty() {
        return Err(PlatformError::Unauthenticated);
    }
    Ok(t.to_string())
}

/// Runs a platform call off the async runtime; the store does blocking I/O.
async fn run<T, F>(platform: &Arc<Platform>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Platform) -> Result<T, PlatformError> + Send + 'static,
{
    let p = platform.clone();
    match tokio::task::spawn_blocking(move || f(&p)).await {
        Ok(r) => r.map(Json),
        Err(e) => std::panic::resume_unwind(e.into_panic()),
    }
}

pub fn router(platform: Arc<Platform>) -> Router {
    let api = Router::new()
        .route("/login", post(login))
        .route("/questions", get(list_questions).post(publish_question))
        .route("/questions/{id}", get(get_question))
        .route("/questions/{id}/initial-snapshot", get(initial_snapshot))
        .route("/questions/{id}/leaderboard", get(leaderboard))
        .route("/sessions", post(start_session))
        .route("/sessions/resume", post(resume_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", post(record_event))
        .route("/sessions/{id}/end", post(end_session))
        .route("/tickets", get(list_tickets).post(create_ticket))
        .route("/tickets/{id}/answer", post(answer_ticket))
        .route("/stats", get(stats))
        .route("/check", post(check));
    Router::new().nest(API_BASE, api).with_state(platform)
}

async fn login(State(p): State<Arc<Platform>>, Json(req): Json<LoginRequest>) -> ApiResult<LoginResponse> {
    run(&p, move |p| {
        let (t, role) = p.login(&req.user_id, &req.secret)?;
        Ok(LoginResponse {
            token: t.token,
            user_id: t.user_id,
            role,
            expires_at: t.expires_at,
        })
    })
    .await
}

async fn list_questions(State(p): State<Arc<Platform>>, h: HeaderMap) -> impl IntoResponse {
    let t = token(&h)?;
    run(&p, move |p| p.list_questions(&t)).await
}

async fn publish_question(
    State(p): State<Arc<Platform>>,
    h: HeaderMap,
    Json(draft): Json<QuestionDraft>,
) -> Result<(StatusCode, Json<QuestionCreated>), PlatformError> {
    let t = token(&h)?;
    let created = run(&p, move |p| {
        p.publish_question(&t, draft)
            .map(|question_id| QuestionCreated { question_id })
    })
    .await?;
    Ok((StatusCode::CREATED, created))
}

async fn get_question(State(p): State<Arc<Platform>>, h: HeaderMap, Path(id): Path<String>) -> impl IntoResponse {
    let t = token(&h)?;
    run(&p, move |p| p.get_question(&t, &QuestionId::new(id))).await
}

async fn initial_snapshot(
    State(p): State<Arc<Platform>>,
    h: HeaderMap,
    Path(id): Path<String>,
) -> impl IntoResponse {
    let t = token(&h)?;
    run(&p, move |p| {
        p.initial_snapshot(&t, &QuestionId::new(id))
            .map(|s| SnapshotBody::of(&s))
    })
    .await
}

async fn leaderboard(State(p): State<Arc<Platform>>, h: HeaderMap, Path(id): Path<String>) -> impl IntoResponse {
    let t = token(&h)?;
    run(&p, move |p| p.leaderboard(&t, &QuestionId::new(id))).await
}

async fn start_session(
    State(p): State<Arc<Platform>>,
    h: HeaderMap,
    Json(req): Json<StartSessionRequest>,
) -> impl IntoResponse {
    let t = token(&h)?;
    let started = run(&p, move |p| p.start_session(&t, req)).await?;
    Ok::<_, PlatformError>((StatusCode::CREATED, started))
}

async fn resume_session(
    State(p): State<Arc<Platform>>,
    h: HeaderMap,
    Json(req): Json<ResumeRequest>,
) -> impl IntoResponse {
    let t = token(&h)?;
    run(&p, move |p| p.resume_session(&t, req)).await
}

async fn get_session(State(p): State<Arc<Platform>>, h: HeaderMap, Path(id): Path<String>) -> impl IntoResponse {
    let t = token(&h)?;
    run(&p, move |p| p.get_session(&t, &SessionId::new(id))).await
}

async fn record_event(
    State(p): State<Arc<Platform>>,
    h: HeaderMap,
    Path(id): Path<String>,
    Json(req): Json<EventRequest>,
) -> impl IntoResponse {
    let t = token(&h)?;
    run(&p, move |p| {
        p.record_event(&t, &SessionId::new(id), req).map(|e| EventRecorded {
            event_id: e.event_id,
            snapshot_id: e.snapshot_id,
        })
    })
    .await
}

async fn end_session(
    State(p): State<Arc<Platform>>,
    h: HeaderMap,
    Path(id): Path<String>,
    Json(req): Json<EndRequest>,
) -> impl IntoResponse {
    let t = token(&h)?;
    run(&p, move |p| p.end_session(&t, &SessionId::new(id), req.completed)).await
}

async fn list_tickets(State(p): State<Arc<Platform>>, h: HeaderMap) -> impl IntoResponse {
    let t = token(&h)?;
    run(&p, move |p| p.list_tickets(&t)).await
}

async fn create_ticket(
    State(p): State<Arc<Platform>>,
    h: HeaderMap,
    Json(req): Json<TicketRequest>,
) -> impl IntoResponse {
    let t = token(&h)?;
    let created = run(&p, move |p| {
        p.create_help_ticket(&t, &req.session_id, req.form_text)
            .map(|t| TicketCreated {
                ticket_id: t.ticket_id,
                snapshot_id: t.snapshot_id,
            })
    })
    .await?;
    Ok::<_, PlatformError>((StatusCode::CREATED, created))
}

async fn answer_ticket(
    State(p): State<Arc<Platform>>,
    h: HeaderMap,
    Path(id): Path<String>,
    Json(req): Json<AnswerRequest>,
) -> impl IntoResponse {
    let t = token(&h)?;
    run(&p, move |p| {
        let snap = decode_snapshot(&req.answer_snapshot)?;
        p.answer_ticket(&t, &TicketId::new(id), req.explanation, &snap)
    })
    .await
}

#[derive(Deserialize)]
struct StatsQuery {
    #[serde(default)]
    group_by: Option<String>,
}

async fn stats(State(p): State<Arc<Platform>>, h: HeaderMap, Query(q): Query<StatsQuery>) -> impl IntoResponse {
    let t = token(&h)?;
    let by = match q.group_by.as_deref() {
        None => GroupBy::Question,
        Some(s) => s.parse::<GroupBy>().map_err(|e| PlatformError::BadRequest(e.to_string()))?,
    };
    run(&p, move |p| p.stats(&t, by)).await
}

async fn check(State(p): State<Arc<Platform>>, h: HeaderMap, Json(req): Json<CheckRequest>) -> impl IntoResponse {
    let t = token(&h)?;
    run(&p, move |p| {
        let snap = decode_snapshot(&req.snapshot)?;
        p.check(&t, &snap)
    })
    .await
}
