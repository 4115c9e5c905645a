use std::collections::HashMap;
use std::future::Future;
use std::path::{Component, Path as FsPath, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use axum::body::{Body, Bytes};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use tokio::net::TcpListener;

use super::{
    cache_key, AnalysisKind, AnalysisRequest, DiskCache, ServiceConfig, ServiceError, Snapshot, SnapshotSources,
};
use crate::barriers::BarrierKind;

/// Shared state behind the router.
pub struct AppState {
    snapshot: RwLock<Arc<Snapshot>>,
    cache: DiskCache,
    static_dir: Option<PathBuf>,
    /// Source for `POST /api/reload`; absent for in-memory snapshots.
    config: Option<ServiceConfig>,
    /// Re-read on reload so edits to the corpora table take effect.
    config_path: Option<PathBuf>,
    inflight: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    pub fn new(snapshot: Snapshot, cache: DiskCache, static_dir: Option<PathBuf>) -> Self {
        AppState {
            snapshot: RwLock::new(Arc::new(snapshot)),
            cache,
            static_dir,
            config: None,
            config_path: None,
            inflight: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_config(config: ServiceConfig) -> Result<Self, ServiceError> {
        let snapshot = Snapshot::build(&SnapshotSources::from_config(&config)?)?;
        let cache = DiskCache::open(&config.cache_dir, config.cache_capacity)
            .map_err(|e| ServiceError::Config(format!("cache dir {}: {e}", config.cache_dir.display())))?;
        let mut state = AppState::new(snapshot, cache, config.static_dir.clone());
        state.config = Some(config);
        Ok(state)
    }

    /// Loads the config at `path` and remembers it for reloads.
    pub fn from_config_file(path: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let path = path.into();
        let mut state = AppState::from_config(ServiceConfig::load(&path)?)?;
        state.config_path = Some(path);
        Ok(state)
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    /// Rebuilds the snapshot from the config's data files and swaps it in.
    /// Bind address, cache and static settings keep their startup values.
    pub fn reload(&self) -> Result<Arc<Snapshot>, ServiceError> {
        let sources = match (&self.config_path, &self.config) {
            (Some(path), _) => SnapshotSources::from_config(&ServiceConfig::load(path)?)?,
            (None, Some(config)) => SnapshotSources::from_config(config)?,
            (None, None) => return Err(ServiceError::Unavailable("service was not started from a config file".into())),
        };
        let fresh = Arc::new(Snapshot::build(&sources)?);
        *self.snapshot.write().expect("snapshot lock") = fresh.clone();
        Ok(fresh)
    }

    fn flight(&self, key: &str) -> Arc<tokio::sync::Mutex<()>> {
        self.inflight.lock().expect("inflight lock").entry(key.to_string()).or_default().clone()
    }

    fn land(&self, key: &str) {
        let mut map = self.inflight.lock().expect("inflight lock");
        if map.get(key).is_some_and(|m| Arc::strong_count(m) == 1) {
            map.remove(key);
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.envelope())).into_response()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/events", get(events))
        .route("/api/barriers/{kind}/labels", get(labels))
        .route("/api/analyses/{analysis}", get(analysis_get).post(analysis_post))
        .route("/api/reload", post(reload))
        .fallback(fallback)
        .with_state(state)
}

async fn events(State(state): State<Arc<AppState>>) -> Json<Vec<String>> {
    Json(state.snapshot().events().into_iter().map(str::to_string).collect())
}

async fn labels(
    State(state): State<Arc<AppState>>,
    Path(kind): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Json<serde_json::Value>, ServiceError> {
    let kind: BarrierKind = kind.parse().map_err(|e: String| ServiceError::validation("kind", e))?;
    let event = query.get("event").ok_or_else(|| ServiceError::validation("event", "required"))?;
    let counts = state.snapshot().label_counts(event, kind)?;
    let rows: Vec<_> = counts.into_iter().map(|(label, count)| json!({ "label": label, "count": count })).collect();
    Ok(Json(serde_json::Value::Array(rows)))
}

async fn analysis_get(
    State(state): State<Arc<AppState>>,
    Path(analysis): Path<String>,
    Query(pairs): Query<Vec<(String, String)>>,
) -> Result<Response, ServiceError> {
    let analysis: AnalysisKind = analysis.parse()?;
    respond(state, AnalysisRequest::from_pairs(analysis, pairs)?).await
}

async fn analysis_post(
    State(state): State<Arc<AppState>>,
    Path(analysis): Path<String>,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let analysis: AnalysisKind = analysis.parse()?;
    let value: serde_json::Value = if body.iter().all(u8::is_ascii_whitespace) {
        json!({})
    } else {
        serde_json::from_slice(&body).map_err(|e| ServiceError::validation("body", e.to_string()))?
    };
    respond(state, AnalysisRequest::from_json(analysis, &value)?).await
}

/// Resolves, then serves from cache or computes once per key.
async fn respond(state: Arc<AppState>, request: AnalysisRequest) -> Result<Response, ServiceError> {
    let snapshot = state.snapshot();
    let resolved = snapshot.resolve(&request)?;
    let key = cache_key(snapshot.id(), &resolved);
    let started = Instant::now();

    let flight = state.flight(&key);
    let guard = flight.lock().await;
    let (cache, job_key) = (state.cache.clone(), key.clone());
    let outcome = tokio::task::spawn_blocking(move || -> Result<(Vec<u8>, bool), ServiceError> {
        if let Some(bytes) = cache.get(&job_key) {
            return Ok((bytes, true));
        }
        let bytes = snapshot.execute(&resolved)?.to_bytes();
        if let Err(e) = cache.put(&job_key, &bytes) {
            tracing::warn!(key = %job_key, error = %e, "cache write failed");
        }
        Ok((bytes, false))
    })
    .await
    .map_err(|e| ServiceError::Internal(e.to_string()));
    drop(guard);
    drop(flight);
    state.land(&key);
    let (bytes, hit) = outcome??;

    let millis = started.elapsed().as_millis();
    tracing::info!(analysis = request.analysis.as_str(), key = &key[..12], hit, millis, "analysis served");
    let mut response = Response::new(Body::from(bytes));
    let headers = response.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    headers.insert("x-cache", HeaderValue::from_static(if hit { "hit" } else { "miss" }));
    headers.insert("x-compute-millis", HeaderValue::from(millis as u64));
    headers.insert("x-cache-key", HeaderValue::from_str(&key).expect("hex"));
    Ok(response)
}

async fn reload(State(state): State<Arc<AppState>>) -> Result<Json<serde_json::Value>, ServiceError> {
    let worker = state.clone();
    let fresh = tokio::task::spawn_blocking(move || worker.reload())
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
    Ok(Json(json!({ "snapshot": fresh.id(), "events": fresh.events() })))
}

fn content_type(path: &FsPath) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).unwrap_or_default() {
        "html" => "text/html; charset=utf-8",
        "js" | "mjs" => "text/javascript; charset=utf-8",
        "css" => "text/css; charset=utf-8",
        "json" | "map" => "application/json",
        "svg" => "image/svg+xml",
        "png" => "image/png",
        "ico" => "image/x-icon",
        "woff2" => "font/woff2",
        "txt" => "text/plain; charset=utf-8",
        _ => "application/octet-stream",
    }
}

/// Static files from `static_dir`; unknown paths without an extension get
/// `index.html` so client-side routes load.
async fn fallback(State(state): State<Arc<AppState>>, method: Method, uri: Uri) -> Response {
    let path = uri.path();
    if path.starts_with("/api/") || path == "/api" {
        return not_found(path);
    }
    let Some(root) = state.static_dir.as_ref() else {
        return not_found(path);
    };
    if method != Method::GET && method != Method::HEAD {
        return StatusCode::METHOD_NOT_ALLOWED.into_response();
    }
    let rel = PathBuf::from(path.trim_start_matches('/'));
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) || path.contains('\\') {
        return not_found(path);
    }
    let mut file = root.join(&rel);
    if rel.as_os_str().is_empty() || file.is_dir() {
        file = file.join("index.html");
    } else if !file.exists() && rel.extension().is_none() {
        file = root.join("index.html");
    }
    match tokio::fs::read(&file).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(&file))], bytes).into_response(),
        Err(_) => not_found(path),
    }
}

fn not_found(path: &str) -> Response {
    let body = json!({ "error": "not_found", "message": format!("nothing at {path}"), "details": { "path": path } });
    (StatusCode::NOT_FOUND, Json(body)).into_response()
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_listener(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

/// Loads the config at `path`, binds its address (or `bind`) and serves
/// until `shutdown` resolves.
pub async fn serve(
    path: PathBuf,
    bind: Option<String>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let state = tokio::task::spawn_blocking(move || AppState::from_config_file(path))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
    let addr = bind.unwrap_or_else(|| state.config.as_ref().expect("loaded from config").bind.clone());
    let listener = TcpListener::bind(&addr)
        .await
        .map_err(|e| ServiceError::Bind { addr: addr.clone(), message: e.to_string() })?;
    let snapshot = state.snapshot();
    tracing::info!(addr = %listener.local_addr().map(|a| a.to_string()).unwrap_or(addr), snapshot = snapshot.id(), events = ?snapshot.events(), "listening");
    drop(snapshot);
    serve_listener(listener, Arc::new(state), shutdown).await.map_err(|e| ServiceError::Internal(e.to_string()))
}
