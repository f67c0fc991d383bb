//! HTTP+JSON front end for the playground.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | POST | `/session` | `{mode, algo, seed}` | `{id, trial}` |
//! | POST | `/session/{id}/guess` | `{x, y, trial?}` | `{theta, error, trial \| summary}` |
//! | GET | `/session/{id}` | | session snapshot |
//! | GET | `/session/{id}/summary.csv` | | completed trials as CSV |
//!
//! Anything else is served from the static directory, when one is configured.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use limit_core::playground::{Playground, PlaygroundAlgo, SessionMode, TrialView};
use limit_core::Error;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

#[derive(Debug, Deserialize)]
pub struct StartRequest {
    #[serde(default = "default_mode")]
    pub mode: SessionMode,
    pub algo: PlaygroundAlgo,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_mode() -> SessionMode {
    SessionMode::PretrainedFrozen
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StartResponse {
    pub id: u64,
    pub trial: TrialView,
}

#[derive(Debug, Deserialize)]
pub struct GuessRequest {
    pub x: f64,
    pub y: f64,
    /// Index of the trial the guess answers. Stale indices are rejected.
    #[serde(default)]
    pub trial: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

pub struct ApiError(Error);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::UnknownSession(_) => StatusCode::NOT_FOUND,
            Error::Rejected { .. } => StatusCode::CONFLICT,
            Error::Shape { .. } | Error::Config(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(ErrorBody { error: self.0.to_string() })).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        Self(e)
    }
}

pub fn router(playground: Arc<Playground>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/session", post(start_session))
        .route("/session/{id}", get(snapshot))
        .route("/session/{id}/guess", post(submit_guess))
        .route("/session/{id}/summary.csv", get(summary_csv))
        .with_state(playground);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

async fn start_session(
    State(pg): State<Arc<Playground>>,
    Json(req): Json<StartRequest>,
) -> Result<Json<StartResponse>, ApiError> {
    let (id, trial) = pg.start_session(req.mode, req.algo, req.seed)?;
    Ok(Json(StartResponse { id, trial }))
}

async fn submit_guess(
    State(pg): State<Arc<Playground>>,
    Path(id): Path<u64>,
    Json(req): Json<GuessRequest>,
) -> Result<Response, ApiError> {
    // Online sessions run a training step, which is CPU work.
    let out = tokio::task::spawn_blocking(move || pg.submit_guess(id, &[req.x, req.y], req.trial))
        .await
        .map_err(|e| Error::Config(format!("guess task failed: {e}")))??;
    Ok(Json(out).into_response())
}

async fn snapshot(State(pg): State<Arc<Playground>>, Path(id): Path<u64>) -> Result<Response, ApiError> {
    Ok(Json(pg.snapshot(id)?).into_response())
}

async fn summary_csv(State(pg): State<Arc<Playground>>, Path(id): Path<u64>) -> Result<Response, ApiError> {
    let csv = pg.with_session(id, |s| s.records_csv())??;
    Ok(([(header::CONTENT_TYPE, "text/csv")], csv).into_response())
}
