//! HTTP/JSON API over a shared orchestrator.

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kgchat_core::graph::{Label, PropertyValue};
use kgchat_core::llm::{backend_from_config, BackendConfig};
use kgchat_core::orchestrator::{
    unix_millis, ChatTurn, FeedbackError, FeedbackRecord, Orchestrator, OrchestratorConfig, Rating, TurnError,
};
use kgchat_core::rbac::{load_policy, Principal};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::net::TcpListener;

use crate::commands::load_graph;

/// Everything `serve` needs to start.
#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub port: u16,
    pub host: String,
    pub snapshot_path: PathBuf,
    pub policy_path: Option<PathBuf>,
    pub backend: BackendConfig,
    pub max_limit: u64,
    pub dimension: Option<usize>,
    pub audit_log: Option<PathBuf>,
    pub feedback_log: Option<PathBuf>,
}

/// Loads the snapshot, policy and backend named by `config`.
pub fn build_orchestrator(config: &ServiceConfig) -> Result<Orchestrator> {
    let graph = load_graph(&config.snapshot_path)?;
    if let Some(expected) = config.dimension {
        if graph.dimension() != expected {
            bail!("snapshot dimension is {}, expected {expected}", graph.dimension());
        }
    }
    let policy = load_policy(config.policy_path.as_deref()).context("loading policy")?;
    let backend = backend_from_config(&config.backend).context("configuring LLM backend")?;
    let orchestrator_config = OrchestratorConfig { max_limit: config.max_limit, ..OrchestratorConfig::default() };
    Orchestrator::new(graph, policy, backend, orchestrator_config)
        .with_logs(config.audit_log.as_deref(), config.feedback_log.as_deref())
        .context("opening logs")
}

type Shared = Arc<Orchestrator>;

pub fn router(orchestrator: Shared) -> Router {
    Router::new()
        .route("/api/chat", post(chat))
        .route("/api/feedback", post(feedback))
        .route("/api/articles/{id}", get(article))
        .route("/api/roles/me", get(roles_me))
        .route("/api/health", get(health))
        .fallback(|| async { error(StatusCode::NOT_FOUND, "not found") })
        .with_state(orchestrator)
}

/// Serves until `shutdown` resolves, then flushes the logs.
pub async fn serve(listener: TcpListener, orchestrator: Shared, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<()> {
    axum::serve(listener, router(orchestrator.clone())).with_graceful_shutdown(shutdown).await?;
    orchestrator.flush_logs().context("flushing logs")?;
    Ok(())
}

fn error(status: StatusCode, message: &str) -> Response {
    (status, Json(json!({ "error": message }))).into_response()
}

fn bearer(headers: &HeaderMap) -> Option<String> {
    let value = headers.get(header::AUTHORIZATION)?.to_str().ok()?.trim();
    let (scheme, token) = value.split_once(' ')?;
    scheme.eq_ignore_ascii_case("bearer").then(|| token.trim().to_string())
}

/// The header token wins over one given in the body or query string.
fn token_from(headers: &HeaderMap, fallback: Option<String>) -> Option<String> {
    bearer(headers).or(fallback)
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| error(StatusCode::BAD_REQUEST, &format!("invalid request body: {e}")))
}

#[derive(Deserialize)]
struct ChatRequest {
    token: Option<String>,
    #[serde(default = "default_session")]
    session_id: String,
    message: String,
}

fn default_session() -> String {
    "default".to_string()
}

async fn chat(State(orchestrator): State<Shared>, headers: HeaderMap, body: Bytes) -> Response {
    let request: ChatRequest = match parse_body(&body) {
        Ok(r) => r,
        Err(response) => return response,
    };
    let Some(token) = token_from(&headers, request.token) else {
        return error(StatusCode::UNAUTHORIZED, "invalid token");
    };
    let turn = ChatTurn::new(request.session_id, request.message);
    let outcome = tokio::task::spawn_blocking(move || orchestrator.handle_turn(&turn, &token)).await;
    match outcome {
        Ok(Ok(response)) => Json(response).into_response(),
        Ok(Err(TurnError::InvalidToken)) => error(StatusCode::UNAUTHORIZED, "invalid token"),
        Ok(Err(TurnError::Internal(message))) => error(StatusCode::INTERNAL_SERVER_ERROR, &message),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, &e.to_string()),
    }
}

#[derive(Deserialize)]
struct FeedbackRequest {
    turn_id: String,
    rating: Rating,
    comment: Option<String>,
}

async fn feedback(State(orchestrator): State<Shared>, body: Bytes) -> Response {
    let request: FeedbackRequest = match parse_body(&body) {
        Ok(r) => r,
        Err(response) => return response,
    };
    let record =
        FeedbackRecord { turn_id: request.turn_id, rating: request.rating, comment: request.comment, timestamp: unix_millis() };
    match orchestrator.record_feedback(record) {
        Ok(()) => Json(json!({ "ok": true })).into_response(),
        Err(FeedbackError::UnknownTurn(_)) => error(StatusCode::NOT_FOUND, "unknown turn"),
        Err(FeedbackError::Io(message)) => error(StatusCode::INTERNAL_SERVER_ERROR, &message),
    }
}

#[derive(Deserialize)]
struct TokenQuery {
    token: Option<String>,
}

fn principal(orchestrator: &Orchestrator, headers: &HeaderMap, query: TokenQuery) -> Result<Principal, Response> {
    token_from(headers, query.token)
        .and_then(|t| orchestrator.authenticate(&t).ok())
        .ok_or_else(|| error(StatusCode::UNAUTHORIZED, "invalid token"))
}

async fn article(
    State(orchestrator): State<Shared>,
    Path(id): Path<String>,
    Query(query): Query<TokenQuery>,
    headers: HeaderMap,
) -> Response {
    let principal = match principal(&orchestrator, &headers, query) {
        Ok(p) => p,
        Err(response) => return response,
    };
    if !orchestrator.policy().labels_of(&principal).contains(Label::Article.as_str()) {
        return error(StatusCode::FORBIDDEN, "access denied");
    }
    let Ok(id) = id.parse::<i64>() else {
        return error(StatusCode::BAD_REQUEST, "article id must be an integer");
    };
    match orchestrator.graph().find_article(id) {
        None => error(StatusCode::NOT_FOUND, "article not found"),
        Some(node) => {
            let properties: serde_json::Map<String, Value> = node
                .properties
                .iter()
                .filter(|(k, _)| k.as_str() != "content_vector")
                .map(|(k, v)| (k.clone(), PropertyValue::to_json(v)))
                .collect();
            Json(Value::Object(properties)).into_response()
        }
    }
}

async fn roles_me(State(orchestrator): State<Shared>, Query(query): Query<TokenQuery>, headers: HeaderMap) -> Response {
    match principal(&orchestrator, &headers, query) {
        Ok(p) => {
            let capabilities: Vec<&str> =
                orchestrator.policy().capabilities_of(&p).into_iter().map(|c| c.as_str()).collect();
            Json(json!({ "user": p.user_id, "roles": p.roles, "capabilities": capabilities })).into_response()
        }
        Err(response) => response,
    }
}

async fn health(State(orchestrator): State<Shared>) -> Response {
    Json(json!({ "status": "ok", "articles": orchestrator.graph().count_label(Label::Article) })).into_response()
}
