//! HTTP/JSON service for stepping through tradeoff traces one decision at a
//! time, with accept and rollback.

mod error;
mod session;
mod store;

use std::sync::Arc;
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;

pub use error::{ApiError, ErrorBody};
pub use session::{
    CreateSession, DietRegionRequest, DietRegionView, DietRequest, DietTables, FoodGroupView, PendingStep, ProblemKind,
    QuantityValue, RegimenRef, RollbackRequest, RowRef, Session, SessionView, StepRequest, StepView,
};
pub use store::{SessionHandle, SessionStore};

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServerConfig {
    /// Idle time after which a session is dropped.
    pub ttl: Duration,
    /// Period of the background purge; `None` purges only on access.
    pub sweep: Option<Duration>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { ttl: Duration::from_secs(3600), sweep: Some(Duration::from_secs(60)) }
    }
}

#[derive(Clone)]
pub struct AppState {
    store: Arc<SessionStore>,
    tables: Arc<DietTables>,
}

impl AppState {
    pub fn new(config: &ServerConfig) -> Self {
        Self { store: Arc::new(SessionStore::new(config.ttl)), tables: Arc::new(DietTables::bundled()) }
    }

    pub fn store(&self) -> &SessionStore {
        &self.store
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))?
}

/// Runs `f` on the session with its lock held for the whole call.
async fn with_session<T: Send + 'static>(
    state: &AppState,
    id: &str,
    f: impl FnOnce(&mut Session) -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    let mut guard = state.store.get(id)?.lock_owned().await;
    blocking(move || f(&mut guard)).await
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<SessionView> {
    let Json(request) = body?;
    let tables = state.tables.clone();
    let session = blocking(move || Session::create(uuid::Uuid::new_v4().simple().to_string(), request, &tables)).await?;
    let view = session.view();
    state.store.insert(session);
    Ok(Json(view))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<SessionView> {
    let handle = state.store.get(&id)?;
    let view = handle.lock().await.view();
    Ok(Json(view))
}

async fn propose(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<StepRequest>, JsonRejection>,
) -> ApiResult<PendingStep> {
    let Json(request) = body?;
    with_session(&state, &id, move |s| s.propose(&request)).await.map(Json)
}

async fn accept(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<SessionView> {
    with_session(&state, &id, Session::accept).await.map(Json)
}

async fn rollback(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<RollbackRequest>, JsonRejection>,
) -> ApiResult<SessionView> {
    let Json(RollbackRequest { to }) = body?;
    with_session(&state, &id, move |s| s.rollback(to)).await.map(Json)
}

async fn diet_region(
    State(state): State<AppState>,
    body: Result<Json<DietRegionRequest>, JsonRejection>,
) -> ApiResult<DietRegionView> {
    let Json(request) = body?;
    let tables = state.tables.clone();
    blocking(move || session::diet_region(&request, &tables)).await.map(Json)
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(get_session))
        .route("/v1/sessions/{id}/propose", post(propose))
        .route("/v1/sessions/{id}/accept", post(accept))
        .route("/v1/sessions/{id}/rollback", post(rollback))
        .route("/v1/diet/region", post(diet_region))
        .with_state(state)
}

/// Serves the API on `listener` until the process stops.
pub async fn serve(listener: TcpListener, config: ServerConfig) -> std::io::Result<()> {
    let state = AppState::new(&config);
    if let Some(period) = config.sweep {
        let store = state.store.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(period);
            loop {
                tick.tick().await;
                let dropped = store.purge_expired();
                if dropped > 0 {
                    tracing::info!(dropped, "expired sessions purged");
                }
            }
        });
    }
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}
