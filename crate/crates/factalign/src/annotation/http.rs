//! JSON HTTP front end of the annotation service.
//!
//! Annotator routes:
//! - `POST /annotators` `{id, language}`
//! - `GET /tasks/next?annotator=ID` (204 when nothing is left)
//! - `POST /tasks/{id}/submission?annotator=ID`
//!
//! Admin routes need `Authorization: Bearer TOKEN`:
//! - `POST /admin/tasks` with a JSON array of tasks
//! - `GET /admin/qualify?language=hi&top_n=4`
//! - `GET /admin/export?language=hi&rule=majority`
//! - `GET /admin/stats`
//! - `GET /admin/submissions/{record_id}`

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use factalign_core::Language;

use super::{Aggregation, AnnotationError, AnnotationService, AnnotationTask, SubmissionRequest};

type Shared = Arc<AnnotationService>;

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<AnnotationError> for ApiError {
    fn from(e: AnnotationError) -> Self {
        let status = match &e {
            AnnotationError::UnknownTask(_) | AnnotationError::UnknownAnnotator(_) => StatusCode::NOT_FOUND,
            AnnotationError::Duplicate { .. }
            | AnnotationError::DuplicateTask(_)
            | AnnotationError::AnnotatorConflict(_) => StatusCode::CONFLICT,
            AnnotationError::NotServed { .. } => StatusCode::FORBIDDEN,
            AnnotationError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            AnnotationError::Log(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/annotators", post(register))
        .route("/tasks/next", get(next_task))
        .route("/tasks/{id}/submission", post(submit))
        .route("/admin/tasks", post(add_tasks))
        .route("/admin/qualify", get(qualify))
        .route("/admin/export", get(export))
        .route("/admin/stats", get(stats))
        .route("/admin/submissions/{record_id}", get(submission))
        .with_state(service)
}

fn check_admin(service: &AnnotationService, headers: &HeaderMap) -> Result<(), ApiError> {
    let Some(expected) = service.config().admin_token.as_deref() else {
        return Err(ApiError(StatusCode::FORBIDDEN, "admin routes are disabled".into()));
    };
    let given = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    if given == Some(expected) {
        Ok(())
    } else {
        Err(ApiError(StatusCode::UNAUTHORIZED, "missing or wrong admin token".into()))
    }
}

#[derive(Deserialize)]
struct RegisterBody {
    id: String,
    language: Language,
}

async fn register(State(s): State<Shared>, Json(body): Json<RegisterBody>) -> Result<Response, ApiError> {
    let profile = s.register(&body.id, body.language)?;
    Ok((StatusCode::CREATED, Json(profile)).into_response())
}

#[derive(Deserialize)]
struct AnnotatorQuery {
    annotator: Option<String>,
}

async fn next_task(State(s): State<Shared>, Query(q): Query<AnnotatorQuery>) -> Result<Response, ApiError> {
    let id = q.annotator.ok_or_else(|| bad_request("annotator query parameter is required"))?;
    Ok(match s.next_task(&id)? {
        Some(task) => Json(task).into_response(),
        None => StatusCode::NO_CONTENT.into_response(),
    })
}

async fn submit(
    State(s): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<AnnotatorQuery>,
    Json(body): Json<SubmissionRequest>,
) -> Result<Response, ApiError> {
    let annotator = q
        .annotator
        .or_else(|| body.annotator_id.clone())
        .ok_or_else(|| bad_request("annotator must be given in the query or the body"))?;
    let record_id = s.submit(&id, &annotator, body)?;
    Ok((StatusCode::CREATED, Json(json!({ "record_id": record_id }))).into_response())
}

async fn add_tasks(
    State(s): State<Shared>,
    headers: HeaderMap,
    Json(tasks): Json<Vec<AnnotationTask>>,
) -> Result<Response, ApiError> {
    check_admin(&s, &headers)?;
    let added = s.add_tasks(tasks)?;
    Ok(Json(json!({ "added": added })).into_response())
}

#[derive(Deserialize)]
struct QualifyQuery {
    language: Language,
    top_n: Option<usize>,
}

async fn qualify(
    State(s): State<Shared>,
    headers: HeaderMap,
    Query(q): Query<QualifyQuery>,
) -> Result<Response, ApiError> {
    check_admin(&s, &headers)?;
    let top_n = q.top_n.unwrap_or(s.config().top_n);
    Ok(Json(s.qualify(q.language, top_n)?).into_response())
}

#[derive(Deserialize)]
struct ExportQuery {
    language: Language,
    #[serde(default)]
    rule: Aggregation,
}

async fn export(
    State(s): State<Shared>,
    headers: HeaderMap,
    Query(q): Query<ExportQuery>,
) -> Result<Response, ApiError> {
    check_admin(&s, &headers)?;
    Ok(Json(s.export_gold(q.language, q.rule)).into_response())
}

async fn stats(State(s): State<Shared>, headers: HeaderMap) -> Result<Response, ApiError> {
    check_admin(&s, &headers)?;
    Ok(Json(s.stats()).into_response())
}

async fn submission(
    State(s): State<Shared>,
    headers: HeaderMap,
    Path(record_id): Path<String>,
) -> Result<Response, ApiError> {
    check_admin(&s, &headers)?;
    let body = s
        .stored_submission(&record_id)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no submission {record_id}")))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

/// Serves the API until ctrl-c.
pub async fn serve(service: Shared, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("annotation service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
