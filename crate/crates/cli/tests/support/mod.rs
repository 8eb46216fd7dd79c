//! Shared setup for the service tests: the fixture orchestrator, the golden
//! transcript, and an in-process request helper.
#![allow(dead_code)]

#[path = "../../../core/tests/common/mod.rs"]
pub mod common;

use std::fs::File;
use std::io::BufReader;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use kgchat_core::graph::Graph;
use kgchat_core::ingest::{build_graph, read_jsonl, Lexicon};
use kgchat_core::llm::MockBackend;
use kgchat_core::orchestrator::{Orchestrator, OrchestratorConfig};
use kgchat_core::rbac::Policy;
use serde_json::Value;
use tower::ServiceExt;

pub const ADMIN: &str = "t-admin-1";
pub const ANALYST: &str = "t-analyst-1";
pub const GUEST: &str = "t-guest-1";

/// Twelve turns covering every capability and role, with grants, denials,
/// a validation rejection and the unsupported capabilities.
pub const GOLDEN_TRANSCRIPT: &[(&str, &str)] = &[
    (ANALYST, "Which articles are similar to article 100?"),
    (ANALYST, "What is the sentiment of article 100?"),
    (ANALYST, "Predict the topic of article 100"),
    (GUEST, "Predict the topic of article 100"),
    (GUEST, "Summarize: The lab released a new model. It trains twice as fast. Pricing was not announced."),
    (GUEST, "Summarize article 101"),
    (ADMIN, "cypher: MATCH (a:Article) WHERE a.compound > 0.5 RETURN a.article_id, a.compound ORDER BY a.compound DESC"),
    (ADMIN, "cypher: MATCH (n:Article) DETACH DELETE n"),
    (ANALYST, "cypher: MATCH (n:Article) RETURN n.title LIMIT 1"),
    (ANALYST, "Fact-check the claim in article 120"),
    (ADMIN, "Which industries will article 130 affect?"),
    (GUEST, "Hello, what can you do?"),
];

pub fn fixture_graph() -> Graph {
    let articles = read_jsonl(BufReader::new(File::open(common::FIXTURE_ARTICLES).unwrap())).unwrap();
    build_graph(&articles, 64, &Lexicon::bundled()).unwrap()
}

pub fn fixture_policy() -> Policy {
    Policy::from_json(&std::fs::read_to_string(common::FIXTURE_POLICY).unwrap()).unwrap()
}

pub fn fixture_orchestrator() -> Arc<Orchestrator> {
    Arc::new(Orchestrator::new(fixture_graph(), fixture_policy(), Box::new(MockBackend), OrchestratorConfig::default()))
}

pub fn fixture_router() -> Router {
    kgchat_cli::server::router(fixture_orchestrator())
}

/// Sends one request through `router` and returns the status and JSON body.
pub async fn send(router: &Router, request: Request<Body>) -> (StatusCode, Value) {
    let response = router.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let body = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, body)
}

pub fn post_json(uri: &str, body: &Value) -> Request<Body> {
    Request::post(uri).header("content-type", "application/json").body(Body::from(body.to_string())).unwrap()
}

pub fn get_with_token(uri: &str, token: Option<&str>) -> Request<Body> {
    let mut builder = Request::get(uri);
    if let Some(token) = token {
        builder = builder.header("authorization", format!("Bearer {token}"));
    }
    builder.body(Body::empty()).unwrap()
}

pub fn chat_request(token: &str, session: &str, message: &str) -> Request<Body> {
    post_json("/api/chat", &serde_json::json!({ "token": token, "session_id": session, "message": message }))
}

/// Runs the golden transcript against a fresh service and returns each
/// response with `turn_id` removed.
pub async fn run_transcript() -> Vec<Value> {
    let router = fixture_router();
    let mut out = Vec::new();
    for (token, message) in GOLDEN_TRANSCRIPT {
        let (status, mut body) = send(&router, chat_request(token, "golden", message)).await;
        assert_eq!(status, StatusCode::OK, "{message}: {body}");
        body.as_object_mut().unwrap().remove("turn_id");
        out.push(body);
    }
    out
}
