//! Local HTTP service over the engine.
//!
//! Sessions are computed on a blocking worker and kept in memory; with a
//! persistence directory, every ready session is also written to
//! `<dir>/<id>.json` and reloaded at startup.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::RwLock;
use tower_http::cors::CorsLayer;

use crate::engine::{Session, SessionConfig};
use crate::error::Error;
use crate::io;
use crate::metrics::MetricId;
use crate::representations::RepresentationId;
use crate::trajectory::{Preprocess, Trajectory};

pub const DEFAULT_PORT: u16 = 8484;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Ready,
    Failed,
}

#[derive(Debug, Clone)]
struct Entry {
    status: Status,
    created_at: u64,
    session: Option<Arc<Session>>,
    error: Option<String>,
}

#[derive(Debug, Default)]
pub struct ServiceConfig {
    pub persist: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Entry>>>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    /// Creates the store, loading any sessions found in the persistence
    /// directory.
    pub fn new(config: ServiceConfig) -> crate::Result<Self> {
        let mut sessions = HashMap::new();
        if let Some(dir) = &config.persist {
            std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.clone(),
                source,
            })?;
            let entries = std::fs::read_dir(dir).map_err(|source| Error::Io {
                path: dir.clone(),
                source,
            })?;
            for path in entries.filter_map(|e| e.ok().map(|e| e.path())) {
                if path.extension().is_some_and(|e| e == "json") {
                    match io::load_session(&path) {
                        Ok(s) => {
                            sessions.insert(s.id.clone(), ready_entry(Arc::new(s)));
                        }
                        Err(e) => log::warn!("ignoring {}: {e}", path.display()),
                    }
                }
            }
        }
        Ok(AppState {
            sessions: Arc::new(RwLock::new(sessions)),
            config: Arc::new(config),
        })
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn ready_entry(session: Arc<Session>) -> Entry {
    Entry {
        status: Status::Ready,
        created_at: now(),
        session: Some(session),
        error: None,
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/region", get(get_region))
        .route("/sessions/{id}/reproduce", post(reproduce))
        .route("/metrics", get(list_metrics))
        .route("/representations", get(list_representations))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(addr: std::net::SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let state = AppState::new(config).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let code = if e.is_validation() {
            StatusCode::BAD_REQUEST
        } else {
            StatusCode::INTERNAL_SERVER_ERROR
        };
        ApiError(code, e.to_string())
    }
}

fn bad_request(msg: impl ToString) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.to_string())
}

fn not_found(id: &str) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, format!("unknown session {id}"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    demo: Trajectory,
    #[serde(default)]
    config: SessionConfig,
    /// Skip smoothing and resampling of the demo.
    #[serde(default)]
    raw: bool,
    /// Return 202 immediately and compute in the background.
    #[serde(default = "yes")]
    wait: bool,
}

fn yes() -> bool {
    true
}

fn envelope(id: &str, entry: &Entry) -> Value {
    let mut body = json!({
        "id": id,
        "status": entry.status,
        "created_at": entry.created_at,
    });
    if let Some(s) = &entry.session {
        body["session"] = serde_json::to_value(s.as_ref()).expect("session serializes");
    }
    if let Some(e) = &entry.error {
        body["error"] = json!(e);
    }
    body
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = serde_json::from_slice(&body).map_err(bad_request)?;
    let demo = if req.raw {
        req.demo
    } else {
        Preprocess::default().apply(&req.demo)?
    };
    // Grid validation is cheap, so bad requests fail synchronously.
    let id = Session::id_for(&demo, &req.config)?;
    let pending = Entry {
        status: Status::Pending,
        created_at: now(),
        session: None,
        error: None,
    };
    {
        let mut sessions = state.sessions.write().await;
        if let Some(existing) = sessions.get(&id) {
            if existing.status == Status::Ready {
                return Ok((StatusCode::CREATED, Json(envelope(&id, existing))).into_response());
            }
        }
        sessions.insert(id.clone(), pending.clone());
    }
    let task = {
        let state = state.clone();
        let id = id.clone();
        let workers = state.config.workers;
        let config = req.config;
        tokio::task::spawn_blocking(move || {
            let outcome = Session::compute(demo, config, workers);
            if let (Ok(s), Some(dir)) = (&outcome, &state.config.persist) {
                if let Err(e) = io::save_session(&dir.join(format!("{}.json", s.id)), s) {
                    log::warn!("could not persist session {}: {e}", s.id);
                }
            }
            let entry = match outcome {
                Ok(s) => Entry {
                    status: Status::Ready,
                    session: Some(Arc::new(s)),
                    ..pending
                },
                Err(e) => Entry {
                    status: Status::Failed,
                    error: Some(e.to_string()),
                    ..pending
                },
            };
            state.sessions.blocking_write().insert(id, entry.clone());
            entry
        })
    };
    if !req.wait {
        let sessions = state.sessions.read().await;
        let entry = sessions.get(&id).expect("just inserted");
        return Ok((StatusCode::ACCEPTED, Json(envelope(&id, entry))).into_response());
    }
    let entry = task
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    match entry.status {
        Status::Ready => Ok((StatusCode::CREATED, Json(envelope(&id, &entry))).into_response()),
        _ => Err(ApiError(
            StatusCode::INTERNAL_SERVER_ERROR,
            entry.error.unwrap_or_default(),
        )),
    }
}

async fn lookup(state: &AppState, id: &str) -> Result<Entry, ApiError> {
    state
        .sessions
        .read()
        .await
        .get(id)
        .cloned()
        .ok_or_else(|| not_found(id))
}

async fn ready(state: &AppState, id: &str) -> Result<Arc<Session>, ApiError> {
    let entry = lookup(state, id).await?;
    match (entry.status, entry.session) {
        (Status::Ready, Some(s)) => Ok(s),
        (Status::Failed, _) => Err(ApiError(
            StatusCode::INTERNAL_SERVER_ERROR,
            entry.error.unwrap_or_default(),
        )),
        _ => Err(ApiError(StatusCode::CONFLICT, format!("session {id} is still pending"))),
    }
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let entry = lookup(&state, &id).await?;
    Ok(Json(envelope(&id, &entry)))
}

#[derive(Debug, Deserialize)]
struct RegionQuery {
    robust: Option<f64>,
}

async fn get_region(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<RegionQuery>,
) -> Result<Response, ApiError> {
    let session = ready(&state, &id).await?;
    let view = session.region_view(query.robust)?;
    Ok(Json(view).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReproduceRequest {
    point: Vec<f64>,
}

async fn reproduce(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: ReproduceRequest = serde_json::from_slice(&body).map_err(bad_request)?;
    let session = ready(&state, &id).await?;
    let result = tokio::task::spawn_blocking(move || session.reproduce(&req.point))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(result).into_response())
}

async fn list_metrics() -> Json<Value> {
    let metrics: Vec<Value> = MetricId::ALL
        .iter()
        .map(|m| json!({ "id": m.as_str(), "name": m.display_name(), "index_aligned": m.is_index_aligned() }))
        .collect();
    Json(json!(metrics))
}

async fn list_representations() -> Json<Value> {
    let reps: Vec<Value> = RepresentationId::ALL
        .iter()
        .map(|r| json!({ "id": r.as_str(), "name": r.as_str().to_uppercase() }))
        .collect();
    Json(json!(reps))
}
