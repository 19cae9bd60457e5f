//! HTTP session service for interactive play against engine strategies.
//!
//! Routes: `POST /sessions`, `POST /sessions/{id}/stake`,
//! `GET /sessions/{id}` and `GET /opponents`.

pub mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, RwLock};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use session::{
    opponent_catalogue, CreateSession, OpponentInfo, Session, SessionError, SessionView, TurnEntry,
    DEFAULT_STAKE_CAP,
};

/// Service settings.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub stake_cap: f64,
    /// Directory for one JSON file per session; in-memory only if unset.
    pub persist_dir: Option<PathBuf>,
    /// Allowed browser origin; any origin if unset.
    pub allowed_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { stake_cap: DEFAULT_STAKE_CAP, persist_dir: None, allowed_origin: None }
    }
}

/// Shared state: each session sits behind its own lock so that
/// mutations of one session are serialized without blocking others.
#[derive(Default)]
pub struct AppState {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    series: Mutex<HashMap<String, f64>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> std::io::Result<Self> {
        let mut sessions = HashMap::new();
        if let Some(dir) = &config.persist_dir {
            std::fs::create_dir_all(dir)?;
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                if path.extension().and_then(|e| e.to_str()) != Some("json") {
                    continue;
                }
                let text = std::fs::read_to_string(&path)?;
                let parsed = serde_json::from_str::<Session>(&text)
                    .map_err(|e| e.to_string())
                    .and_then(|s| s.restore().map_err(|e| e.to_string()));
                match parsed {
                    Ok(s) => {
                        sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
                    }
                    Err(e) => eprintln!("skipping {}: {e}", path.display()),
                }
            }
        }
        Ok(AppState { config, sessions: RwLock::new(sessions), series: Mutex::new(HashMap::new()) })
    }

    async fn persist(&self, session: &Session) -> Result<(), ApiError> {
        if let Some(dir) = &self.config.persist_dir {
            let text = serde_json::to_string(session).map_err(|e| ApiError::internal(e.to_string()))?;
            tokio::fs::write(dir.join(format!("{}.json", session.id)), text)
                .await
                .map_err(|e| ApiError::internal(e.to_string()))?;
        }
        Ok(())
    }

    async fn lookup(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError { status: StatusCode::NOT_FOUND, message: format!("no session {id:?}") })
    }
}

/// An error response `{"error": message}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn internal(message: String) -> Self {
        ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::BadRequest(_) => StatusCode::BAD_REQUEST,
            SessionError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::Finished => StatusCode::CONFLICT,
        };
        ApiError { status, message: e.to_string() }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: &self.message })).into_response()
    }
}

/// Body of `POST /sessions/{id}/stake`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StakeRequest {
    pub amount: f64,
}

/// Reply to a stake: the resolved turn and the full public state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StakeResponse {
    pub outcome: TurnEntry,
    pub session: SessionView,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Json(request): Json<CreateSession>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let provoked = match &request.series {
        Some(token) => {
            let memory = state.series.lock().await.get(token).copied().unwrap_or(0.0);
            let threshold = match request.opponent.resolve()? {
                pennies_core::engine::Strategy::TitForTat { threshold } => threshold,
                _ => f64::INFINITY,
            };
            memory > threshold
        }
        None => false,
    };
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session::create(id.clone(), &request, provoked)?;
    state.persist(&session).await?;
    let view = session.view();
    state.sessions.write().await.insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn submit_stake(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<StakeRequest>,
) -> Result<Json<StakeResponse>, ApiError> {
    let handle = state.lookup(&id).await?;
    let mut session = handle.lock().await;
    let outcome = session.submit_stake(body.amount, state.config.stake_cap)?.clone();
    if session.is_finished() {
        if let Some(token) = &session.series {
            state.series.lock().await.insert(token.clone(), session.human_cost());
        }
    }
    state.persist(&session).await?;
    Ok(Json(StakeResponse { outcome, session: session.view() }))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let handle = state.lookup(&id).await?;
    let view = handle.lock().await.view();
    Ok(Json(view))
}

async fn list_opponents() -> Json<Vec<OpponentInfo>> {
    Json(opponent_catalogue())
}

/// The application router with CORS applied.
pub fn router(state: Arc<AppState>) -> Router {
    let origin = match &state.config.allowed_origin {
        Some(o) => match HeaderValue::from_str(o) {
            Ok(v) => AllowOrigin::exact(v),
            Err(_) => AllowOrigin::any(),
        },
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers(Any);
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/:id", get(get_session))
        .route("/sessions/:id/stake", post(submit_stake))
        .route("/opponents", get(list_opponents))
        .layer(cors)
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(config)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
