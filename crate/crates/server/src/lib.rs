//! HTTP sessions over the rewriting engine: load a graph and rules, list
//! redexes, apply or undo steps, export the derivation.

mod error;
mod session;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use hoport_core::rewrite::Derivation;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use error::ApiError;
pub use session::{
    view, ApplyRequest, CreateSession, Diff, GraphView, Highlight, Layout, RedexList, RedexSummary, Session,
    SessionDoc, StepResult,
};

/// Serialized form of every live session.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct Snapshot {
    pub next: u64,
    pub sessions: BTreeMap<String, SessionDoc>,
}

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
    next: AtomicU64,
}

impl AppState {
    pub fn new() -> Arc<Self> {
        Arc::new(AppState::default())
    }

    pub fn insert(&self, session: Session) -> String {
        let id = format!("s{}", self.next.fetch_add(1, Ordering::Relaxed) + 1);
        self.sessions
            .write()
            .unwrap()
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))
    }

    pub fn snapshot(&self) -> Snapshot {
        let sessions = self.sessions.read().unwrap();
        Snapshot {
            next: self.next.load(Ordering::Relaxed),
            sessions: sessions
                .iter()
                .map(|(id, s)| (id.clone(), s.lock().unwrap().to_doc()))
                .collect(),
        }
    }

    pub fn restore(snapshot: &Snapshot) -> Result<Arc<Self>, ApiError> {
        let mut sessions = BTreeMap::new();
        for (id, doc) in &snapshot.sessions {
            sessions.insert(id.clone(), Arc::new(Mutex::new(Session::restore(doc)?)));
        }
        Ok(Arc::new(AppState {
            sessions: RwLock::new(sessions),
            next: AtomicU64::new(snapshot.next),
        }))
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::Malformed(e.to_string()))
}

async fn create(State(state): State<Arc<AppState>>, body: Bytes) -> Result<(StatusCode, Json<Value>), ApiError> {
    let req: CreateSession = parse(&body)?;
    let session = Session::create(&req)?;
    let digest = session.digest();
    let id = state.insert(session);
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "digest": digest }))))
}

async fn graph(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<GraphView>, ApiError> {
    let session = state.get(&id)?;
    let view = session.lock().unwrap().graph();
    Ok(Json(view))
}

async fn redexes(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<RedexList>, ApiError> {
    let session = state.get(&id)?;
    let list = session.lock().unwrap().list_redexes()?;
    Ok(Json(list))
}

async fn apply_step(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<StepResult>, ApiError> {
    let session = state.get(&id)?;
    let req: ApplyRequest = parse(&body)?;
    let out = session.lock().unwrap().apply(&req)?;
    Ok(Json(out))
}

async fn undo(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<GraphView>, ApiError> {
    let session = state.get(&id)?;
    let view = session.lock().unwrap().undo()?;
    Ok(Json(view))
}

async fn derivation(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<Derivation>, ApiError> {
    let session = state.get(&id)?;
    let d = session.lock().unwrap().derivation();
    Ok(Json(d))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/graph", get(graph))
        .route("/sessions/{id}/redexes", get(redexes))
        .route("/sessions/{id}/apply", post(apply_step))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/derivation", get(derivation))
        .with_state(state)
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    SnapshotFormat { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    SnapshotContent { path: PathBuf, source: ApiError },
    #[error("server: {0}")]
    Server(std::io::Error),
}

pub fn load_snapshot(path: &Path) -> Result<Arc<AppState>, ServeError> {
    if !path.exists() {
        return Ok(AppState::new());
    }
    let io = |source| ServeError::Io {
        path: path.into(),
        source,
    };
    let text = std::fs::read_to_string(path).map_err(io)?;
    let snapshot: Snapshot = serde_json::from_str(&text).map_err(|source| ServeError::SnapshotFormat {
        path: path.into(),
        source,
    })?;
    AppState::restore(&snapshot).map_err(|source| ServeError::SnapshotContent {
        path: path.into(),
        source,
    })
}

pub fn save_snapshot(state: &AppState, path: &Path) -> Result<(), ServeError> {
    let text = serde_json::to_string_pretty(&state.snapshot()).expect("snapshot serializes");
    std::fs::write(path, text + "\n").map_err(|source| ServeError::Io {
        path: path.into(),
        source,
    })
}

/// Serves until Ctrl-C, then writes the snapshot if one was requested.
pub async fn serve(addr: SocketAddr, snapshot: Option<PathBuf>) -> Result<(), ServeError> {
    let state = match &snapshot {
        Some(path) => load_snapshot(path)?,
        None => AppState::new(),
    };
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(ServeError::Server)?;
    eprintln!(
        "listening on http://{}",
        listener.local_addr().map_err(ServeError::Server)?
    );
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(ServeError::Server)?;
    if let Some(path) = &snapshot {
        save_snapshot(&state, path)?;
    }
    Ok(())
}
