//! HTTP session service for the browser workbench.
//!
//! Student mistakes (parse and evaluation errors) are ordinary 200 responses
//! with an `error` body; non-2xx codes mean the request itself was wrong.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path as UrlPath, Query, Request, State};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::engine::run_pipeline;
use crate::exercises::{builtin_exercises, find_exercise, grade, load_exercise_dir, Exercise};
use crate::fixtures;
use crate::frame::{CubeFrame, FrameDiff};
use crate::io;
use crate::lang::{normalize_source, parse_pipeline, print_stage};
use crate::wire::{Diagnostic, WireFrame};

pub const MAX_SOURCE_BYTES: usize = 16 * 1024;
const MAX_BODY_BYTES: usize = 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: String,
    pub session_ttl: Duration,
    pub instructor_token: Option<String>,
    pub fixture_dir: Option<PathBuf>,
    pub exercise_dir: Option<PathBuf>,
    /// `*` allows any origin.
    pub cors_origin: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: "127.0.0.1:7878".to_string(),
            session_ttl: Duration::from_secs(4 * 60 * 60),
            instructor_token: None,
            fixture_dir: None,
            exercise_dir: None,
            cors_origin: "*".to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("fixture {path}: {source}")]
    Fixture { path: PathBuf, source: io::IoError },
    #[error("reading {path}: {source}")]
    Dir { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Exercises(#[from] crate::exercises::ExerciseError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("invalid CORS origin `{0}`")]
    Cors(String),
    #[error("server error: {0}")]
    Serve(std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub source: String,
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub initial: CubeFrame,
    pub current: CubeFrame,
    pub history: Vec<HistoryEntry>,
    pub active_exercise: Option<String>,
    last_access: Instant,
}

impl Session {
    fn new(id: String, frame: CubeFrame) -> Session {
        Session {
            id,
            current: frame.clone(),
            initial: frame,
            history: Vec::new(),
            active_exercise: None,
            last_access: Instant::now(),
        }
    }

    /// Re-runs the committed history from the initial frame.
    pub fn replay(initial: &CubeFrame, history: &[HistoryEntry]) -> Result<CubeFrame, Diagnostic> {
        let mut frame = initial.clone();
        for entry in history {
            let pipeline = parse_pipeline(&entry.source).map_err(|e| Diagnostic::from(&e))?;
            let run = run_pipeline(&frame, &pipeline);
            if let Some(e) = run.error {
                return Err(Diagnostic::from(&e));
            }
            if let Some(last) = run.traces.last() {
                frame = last.output.clone();
            }
        }
        Ok(frame)
    }
}

pub struct AppState {
    config: ServiceConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    exercises: Vec<Exercise>,
    fixtures: BTreeMap<String, CubeFrame>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<AppState, ServiceError> {
        let mut fixtures: BTreeMap<String, CubeFrame> = fixtures::BUILTIN_IDS
            .iter()
            .map(|id| (id.to_string(), fixtures::by_id(id).expect("builtin fixture")))
            .collect();
        if let Some(dir) = &config.fixture_dir {
            fixtures.extend(load_fixture_dir(dir)?);
        }
        let mut exercises = builtin_exercises();
        if let Some(dir) = &config.exercise_dir {
            for ex in load_exercise_dir(dir)? {
                exercises.retain(|e| e.id != ex.id);
                exercises.push(ex);
            }
        }
        Ok(AppState {
            config,
            sessions: Mutex::new(HashMap::new()),
            exercises,
            fixtures,
        })
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().len()
    }

    /// Drops sessions idle for longer than the TTL; returns how many.
    pub fn evict_expired(&self, now: Instant) -> usize {
        let ttl = self.config.session_ttl;
        let mut sessions = self.sessions.lock();
        let before = sessions.len();
        sessions.retain(|_, s| {
            // A session busy serving a request is not idle.
            s.try_lock()
                .is_none_or(|s| now.saturating_duration_since(s.last_access) <= ttl)
        });
        before - sessions.len()
    }

    fn insert(&self, frame: CubeFrame) -> Arc<Mutex<Session>> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Arc::new(Mutex::new(Session::new(id.clone(), frame)));
        self.sessions.lock().insert(id, session.clone());
        session
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let found = self.sessions.lock().get(id).cloned();
        let session = found.ok_or_else(|| ApiError::not_found("UnknownSession", format!("no session `{id}`")))?;
        {
            let mut s = session.lock();
            if s.last_access.elapsed() > self.config.session_ttl {
                drop(s);
                self.sessions.lock().remove(id);
                return Err(ApiError::not_found("UnknownSession", format!("session `{id}` expired")));
            }
            s.last_access = Instant::now();
        }
        Ok(session)
    }
}

fn load_fixture_dir(dir: &Path) -> Result<BTreeMap<String, CubeFrame>, ServiceError> {
    let entries = std::fs::read_dir(dir).map_err(|source| ServiceError::Dir {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut out = BTreeMap::new();
    for entry in entries.flatten() {
        let path = entry.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if !matches!(ext, "csv" | "json") {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let frame = io::load(&path).map_err(|source| ServiceError::Fixture {
            path: path.clone(),
            source,
        })?;
        out.insert(stem.to_string(), frame);
    }
    Ok(out)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn not_found(code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, code, message)
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        let status = r.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE {
            "BodyTooLarge"
        } else {
            "BadRequest"
        };
        ApiError::new(status, code, r.body_text())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Shared = State<Arc<AppState>>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub fixture: Option<String>,
    pub frame: Option<WireFrame>,
}

#[derive(Debug, Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub frame: WireFrame,
    pub history: Vec<HistoryEntry>,
}

impl SessionView {
    fn of(s: &Session) -> SessionView {
        SessionView {
            session_id: s.id.clone(),
            frame: WireFrame::from_frame(&s.current),
            history: s.history.clone(),
        }
    }
}

async fn create_session(State(app): Shared, body: Option<Json<serde_json::Value>>) -> ApiResult<SessionView> {
    let req: CreateSession = match body {
        Some(Json(v)) => serde_json::from_value(v).map_err(|e| ApiError::bad_request("BadRequest", e.to_string()))?,
        None => CreateSession::default(),
    };
    let frame = match (req.fixture, req.frame) {
        (Some(_), Some(_)) => {
            return Err(ApiError::bad_request("BadRequest", "give either `fixture` or `frame`, not both"))
        }
        (Some(id), None) => app
            .fixtures
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("UnknownFixture", format!("no fixture `{id}`")))?,
        (None, Some(w)) => w
            .to_frame()
            .map_err(|e| ApiError::bad_request(e.code(), e.to_string()))?,
        (None, None) => fixtures::figure1(),
    };
    let session = app.insert(frame);
    let s = session.lock();
    Ok(Json(SessionView::of(&s)))
}

async fn get_session(State(app): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<SessionView> {
    let session = app.session(&id)?;
    let s = session.lock();
    Ok(Json(SessionView::of(&s)))
}

#[derive(Debug, Deserialize)]
pub struct ExecuteRequest {
    pub source: String,
    #[serde(default)]
    pub preview: bool,
}

#[derive(Debug, Serialize)]
pub struct StageView {
    pub verb: &'static str,
    pub source: String,
    pub frame: WireFrame,
    pub diff: FrameDiff,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ExecuteResponse {
    /// The pipeline as run; error spans index into this text.
    pub source: String,
    pub stages: Vec<StageView>,
    pub frame: WireFrame,
    pub committed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Diagnostic>,
}

async fn execute(
    State(app): Shared,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<ExecuteRequest>, JsonRejection>,
) -> ApiResult<ExecuteResponse> {
    let Json(req) = body?;
    if req.source.len() > MAX_SOURCE_BYTES {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "SourceTooLarge",
            format!("source is {} bytes; the limit is {MAX_SOURCE_BYTES}", req.source.len()),
        ));
    }
    let session = app.session(&id)?;
    let mut s = session.lock();
    let source = normalize_source(&req.source);
    let pipeline = match parse_pipeline(&source) {
        Ok(p) => p,
        Err(e) => {
            return Ok(Json(ExecuteResponse {
                source,
                stages: Vec::new(),
                frame: WireFrame::from_frame(&s.current),
                committed: false,
                error: Some(Diagnostic::from(&e)),
            }))
        }
    };
    let run = run_pipeline(&s.current, &pipeline);
    let stages = run
        .traces
        .iter()
        .map(|t| StageView {
            verb: t.stage.verb.kind().name(),
            source: print_stage(&t.stage),
            frame: WireFrame::from_frame(&t.output),
            diff: t.diff.clone(),
            notes: t.notes.clone(),
        })
        .collect();
    let commit = !req.preview && run.error.is_none() && !run.traces.is_empty();
    if commit {
        s.current = run.traces.last().expect("non-empty").output.clone();
        s.history.push(HistoryEntry {
            source: source.clone(),
        });
    }
    let frame = match (&run.error, run.traces.last()) {
        (None, Some(t)) => WireFrame::from_frame(&t.output),
        _ => WireFrame::from_frame(&s.current),
    };
    Ok(Json(ExecuteResponse {
        source,
        stages,
        frame,
        committed: commit,
        error: run.error.as_ref().map(Diagnostic::from),
    }))
}

async fn reset(State(app): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<SessionView> {
    let session = app.session(&id)?;
    let mut s = session.lock();
    s.current = s.initial.clone();
    s.history.clear();
    Ok(Json(SessionView::of(&s)))
}

#[derive(Debug, Deserialize)]
pub struct GradeRequest {
    pub exercise_id: String,
    pub source: String,
}

async fn grade_submission(
    State(app): Shared,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<GradeRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body?;
    if req.source.len() > MAX_SOURCE_BYTES {
        return Err(ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "SourceTooLarge", "source too large"));
    }
    app.session(&id)?;
    let ex = find_exercise(&app.exercises, &req.exercise_id).ok_or_else(|| {
        ApiError::not_found("UnknownExercise", format!("no exercise `{}`", req.exercise_id))
    })?;
    Ok(Json(grade(ex, &req.source)).into_response())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionExport {
    pub initial: WireFrame,
    pub history: Vec<HistoryEntry>,
    #[serde(default)]
    pub active_exercise: Option<String>,
}

async fn export_session(State(app): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<SessionExport> {
    let session = app.session(&id)?;
    let s = session.lock();
    Ok(Json(SessionExport {
        initial: WireFrame::from_frame(&s.initial),
        history: s.history.clone(),
        active_exercise: s.active_exercise.clone(),
    }))
}

async fn import_session(
    State(app): Shared,
    body: Result<Json<SessionExport>, JsonRejection>,
) -> ApiResult<SessionView> {
    let Json(export) = body?;
    let initial = export
        .initial
        .to_frame()
        .map_err(|e| ApiError::bad_request(e.code(), e.to_string()))?;
    let current = Session::replay(&initial, &export.history)
        .map_err(|d| ApiError::bad_request("ReplayFailed", d.message))?;
    let session = app.insert(initial);
    let mut s = session.lock();
    s.current = current;
    s.history = export.history;
    s.active_exercise = export.active_exercise;
    Ok(Json(SessionView::of(&s)))
}

#[derive(Debug, Deserialize)]
struct ExerciseQuery {
    #[serde(default)]
    instructor: bool,
}

async fn list_exercises(
    State(app): Shared,
    Query(q): Query<ExerciseQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    if q.instructor {
        let presented = headers
            .get(axum::http::header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        match (&app.config.instructor_token, presented) {
            (Some(token), Some(p)) if constant_time_eq(token.as_bytes(), p.as_bytes()) => {}
            _ => {
                return Err(ApiError::new(
                    StatusCode::UNAUTHORIZED,
                    "Unauthorized",
                    "instructor mode needs the instructor token",
                ))
            }
        }
    }
    let list: Vec<_> = app.exercises.iter().map(|e| e.summary(q.instructor)).collect();
    Ok(Json(list).into_response())
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

#[derive(Debug, Serialize)]
struct FixtureView {
    id: String,
    dims: (usize, usize),
    frame: WireFrame,
}

async fn list_fixtures(State(app): Shared) -> Json<Vec<FixtureView>> {
    Json(
        app.fixtures
            .iter()
            .map(|(id, f)| FixtureView {
                id: id.clone(),
                dims: f.dimensions(),
                frame: WireFrame::from_frame(f),
            })
            .collect(),
    )
}

async fn health() -> &'static str {
    "ok"
}

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_string();
    let started = Instant::now();
    let response = next.run(req).await;
    tracing::info!(
        "{method} {path} {} {}ms",
        response.status().as_u16(),
        started.elapsed().as_millis()
    );
    response
}

fn cors(origin: &str) -> Result<CorsLayer, ServiceError> {
    let allow = if origin == "*" {
        AllowOrigin::from(Any)
    } else {
        let value = HeaderValue::from_str(origin).map_err(|_| ServiceError::Cors(origin.to_string()))?;
        AllowOrigin::exact(value)
    };
    Ok(CorsLayer::new().allow_origin(allow).allow_methods(Any).allow_headers(Any))
}

pub fn router(state: Arc<AppState>) -> Result<Router, ServiceError> {
    let cors = cors(&state.config.cors_origin)?;
    Ok(Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/import", post(import_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/execute", post(execute))
        .route("/sessions/{id}/reset", post(reset))
        .route("/sessions/{id}/grade", post(grade_submission))
        .route("/sessions/{id}/export", get(export_session))
        .route("/exercises", get(list_exercises))
        .route("/fixtures", get(list_fixtures))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .layer(middleware::from_fn(log_request))
        .layer(cors)
        .with_state(state))
}

pub async fn bind(addr: &str) -> Result<tokio::net::TcpListener, ServiceError> {
    let bind_err = |source| ServiceError::Bind {
        addr: addr.to_string(),
        source,
    };
    let parsed: SocketAddr = addr.parse().map_err(|_| {
        bind_err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a host:port address"))
    })?;
    tokio::net::TcpListener::bind(parsed).await.map_err(bind_err)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve<F>(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    shutdown: F,
) -> Result<(), ServiceError>
where
    F: std::future::Future<Output = ()> + Send + 'static,
{
    let app = router(state.clone())?;
    let period = (state.config.session_ttl / 4).clamp(Duration::from_secs(1), Duration::from_secs(60));
    let sweeper = {
        let state = state.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(period);
            loop {
                tick.tick().await;
                let n = state.evict_expired(Instant::now());
                if n > 0 {
                    tracing::info!("evicted {n} idle session(s)");
                }
            }
        })
    };
    let result = axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(ServiceError::Serve);
    sweeper.abort();
    result
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
        _ = ctrl_c => {},
        _ = term => {},
    }
    tracing::info!("shutting down");
}
