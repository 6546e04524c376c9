//! HTTP front of a [`Session`]: `GET /ui`, `POST /operation`,
//! `GET /health` and `GET /export`.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;

use crate::context::Context;
use crate::session::{OperationError, Session};
use crate::solver::{Solver, SolverError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextEntry {
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationRequest {
    #[serde(alias = "operations")]
    pub operation: String,
    #[serde(default)]
    pub context: Vec<ContextEntry>,
}

impl OperationRequest {
    pub fn new(operation: impl Into<String>) -> Self {
        OperationRequest {
            operation: operation.into(),
            context: Vec::new(),
        }
    }

    pub fn with_context(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.context.push(ContextEntry {
            key: key.into(),
            value: value.into(),
        });
        self
    }

    fn context_map(&self) -> Context {
        self.context
            .iter()
            .map(|e| (e.key.clone(), e.value.clone()))
            .collect()
    }
}

struct Shared {
    session: Mutex<Session>,
    solver: Solver,
    /// Mirror of the session revision, readable without the lock.
    revision: AtomicU64,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    pub fn new(session: Session) -> Self {
        let solver = session.domain().solver().clone();
        let revision = AtomicU64::new(session.revision());
        AppState(Arc::new(Shared {
            session: Mutex::new(session),
            solver,
            revision,
        }))
    }

    pub fn revision(&self) -> u64 {
        self.0.revision.load(Ordering::SeqCst)
    }

    /// Runs `f` with exclusive access to the session on a blocking thread.
    async fn with_session<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&mut Session) -> Result<T, OperationError> + Send + 'static,
    {
        let shared = self.0.clone();
        tokio::task::spawn_blocking(move || {
            let mut session = shared
                .session
                .lock()
                .map_err(|_| ApiError::internal("SessionPoisoned", "an earlier request panicked"))?;
            let out = f(&mut session);
            shared.revision.store(session.revision(), Ordering::SeqCst);
            out.map_err(ApiError::from)
        })
        .await
        .map_err(|e| ApiError::internal("InternalError", e.to_string()))?
    }
}

/// `{"error": code, "detail": text}` with a matching status.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    detail: String,
}

impl ApiError {
    fn internal(code: &'static str, detail: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code,
            detail: detail.into(),
        }
    }
}

impl From<OperationError> for ApiError {
    fn from(e: OperationError) -> Self {
        ApiError {
            status: StatusCode::from_u16(e.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
            code: e.code(),
            detail: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "error": self.code, "detail": self.detail })),
        )
            .into_response()
    }
}

fn json_body(text: Arc<str>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text.to_string()).into_response()
}

async fn get_ui(State(state): State<AppState>) -> Result<Response, ApiError> {
    let json = state.with_session(|s| s.ui_json()).await?;
    Ok(json_body(json))
}

async fn post_operation(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: OperationRequest = serde_json::from_slice(&body).map_err(|e| ApiError {
        status: StatusCode::BAD_REQUEST,
        code: "BadRequest",
        detail: e.to_string(),
    })?;
    let json = state
        .with_session(move |s| s.execute(&req.operation, &req.context_map()))
        .await?;
    Ok(json_body(json))
}

async fn get_export(State(state): State<AppState>) -> Result<Response, ApiError> {
    let text = state.with_session(|s| s.export_instance()).await?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

async fn get_health(State(state): State<AppState>) -> Response {
    let solver = state.0.solver.clone();
    let info = tokio::task::spawn_blocking(move || solver.solver_info()).await;
    match info {
        Ok(Ok(info)) => Json(json!({
            "status": "ok",
            "solver": info,
            "revision": state.revision(),
        }))
        .into_response(),
        Ok(Err(e @ SolverError::Unavailable(_))) => ApiError {
            status: StatusCode::SERVICE_UNAVAILABLE,
            code: "SolverUnavailable",
            detail: e.to_string(),
        }
        .into_response(),
        Ok(Err(e)) => ApiError::internal("SolverError", e.to_string()).into_response(),
        Err(e) => ApiError::internal("InternalError", e.to_string()).into_response(),
    }
}

async fn log_request(State(state): State<AppState>, req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_string();
    let start = Instant::now();
    let response = next.run(req).await;
    log::info!(
        "{method} {path} {} revision={} {:.1}ms",
        response.status().as_u16(),
        state.revision(),
        start.elapsed().as_secs_f64() * 1000.0
    );
    response
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/ui", get(get_ui))
        .route("/operation", post(post_operation))
        .route("/health", get(get_health))
        .route("/export", get(get_export))
        .layer(middleware::from_fn_with_state(state.clone(), log_request))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    serve_until(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

/// Serves until `shutdown` resolves.
pub async fn serve_until<F>(listener: TcpListener, state: AppState, shutdown: F) -> std::io::Result<()>
where
    F: std::future::Future<Output = ()> + Send + 'static,
{
    let addr: SocketAddr = listener.local_addr()?;
    log::info!("listening on http://{addr}");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
