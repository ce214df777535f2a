//! JSON HTTP API over a [`Store`].

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

use super::{Store, StudyError};

pub type SharedStore = Arc<Mutex<Store>>;

impl IntoResponse for StudyError {
    fn into_response(self) -> Response {
        let status = match self {
            StudyError::UnknownSession(_) => StatusCode::NOT_FOUND,
            StudyError::OutOfOrder { .. } | StudyError::Duplicate(_) | StudyError::SessionComplete => {
                StatusCode::CONFLICT
            }
            StudyError::InvalidRt(_) | StudyError::InvalidKey(_) => StatusCode::UNPROCESSABLE_ENTITY,
            StudyError::NoItems | StudyError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.reason(), "message": self.to_string() }))).into_response()
    }
}

fn bad_request(r: JsonRejection) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({ "error": "bad_request", "message": r.body_text() }))).into_response()
}

async fn with_store<T, F>(store: SharedStore, f: F) -> Result<T, StudyError>
where
    T: Send + 'static,
    F: FnOnce(&mut Store) -> Result<T, StudyError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&mut store.lock().unwrap_or_else(|p| p.into_inner())))
        .await
        .map_err(|e| StudyError::Io(e.to_string()))?
}

async fn create_session(State(store): State<SharedStore>) -> Result<Response, StudyError> {
    let s = with_store(store, |s| s.create_session()).await?;
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "session_id": s.session_id,
            "key_mapping": s.key_mapping,
            "instructions": s.key_mapping.instructions(),
            "legend": s.key_mapping.legend(),
            "total": s.items.len(),
        })),
    )
        .into_response())
}

async fn next_trial(State(store): State<SharedStore>, Path(id): Path<String>) -> Result<Response, StudyError> {
    let next = with_store(store, move |s| s.next_trial(&id)).await?;
    Ok(Json(next).into_response())
}

#[derive(Deserialize)]
struct Submission {
    item_id: String,
    key: String,
    rt_ms: f64,
}

async fn submit(
    State(store): State<SharedStore>,
    Path(id): Path<String>,
    body: Result<Json<Submission>, JsonRejection>,
) -> Result<Response, StudyError> {
    let Json(sub) = match body {
        Ok(b) => b,
        Err(r) => return Ok(bad_request(r)),
    };
    let rec = with_store(store, move |s| s.submit(&id, &sub.item_id, &sub.key, sub.rt_ms)).await?;
    Ok(Json(json!({
        "accepted": true,
        "order_index": rec.order_index,
        "response": rec.response,
        "correct": rec.correct,
    }))
    .into_response())
}

#[derive(Deserialize)]
struct ExportQuery {
    /// Comma-separated session ids.
    session: Option<String>,
}

async fn export(State(store): State<SharedStore>, Query(q): Query<ExportQuery>) -> Result<Response, StudyError> {
    let filter: Option<Vec<String>> =
        q.session.map(|s| s.split(',').filter(|x| !x.is_empty()).map(String::from).collect());
    let records = with_store(store, move |s| Ok(s.export(filter.as_deref()))).await?;
    let mut body = Vec::new();
    crate::jsonl::write_to(&mut body, &records).map_err(|e| StudyError::Io(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], Body::from(body)).into_response())
}

pub fn router(store: SharedStore, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/next", get(next_trial))
        .route("/sessions/{id}/responses", post(submit))
        .route("/export", get(export))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serve until Ctrl-C.
pub async fn serve(addr: SocketAddr, store: SharedStore, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
