//! The chat turn loop: authenticate, route, authorize, answer through the
//! LLM or a validated graph query, inspect the result for anomalies, and
//! record the turn with its full explanation.

mod log;
mod router;

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use log::{read_json_lines, JsonLinesLog};
pub use router::{normalize, route_prompt, route_prompt_with, RouteDefaults};

use crate::capabilities::{
    find_similar_with, get_sentiment_with, no_prediction_message, predict_topic_with, Capability, CapabilityError,
    CapabilityRun,
};
use crate::cypher::{run_text, CvlPolicy, EvalError, ResultTable, ValidationReport, DEFAULT_MAX_LIMIT};
use crate::graph::{Graph, Label, PropertyValue};
use crate::llm::{
    format_instruction, render_insights, summarize_instruction, LlmBackend, LlmRequest, Message, NO_DATA_MESSAGE,
};
use crate::rbac::{authenticate, authorize, AccessDecision, AccessVerdict, Policy, Principal};

pub const FACT_CHECK_REPLY: &str =
    "Fact-checking is recognized but not supported: no verified method is available, so no verdict is given.";
pub const INDUSTRY_REPLY: &str =
    "Industry-sector prediction is recognized but not supported: no verified method is available, so no prediction is given.";
pub const LLM_UNAVAILABLE_REPLY: &str = "The language model is unavailable right now. Please try again later.";

pub fn unix_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub turn_id: String,
    pub session_id: String,
    pub user_message: String,
    pub timestamp: u64,
}

impl ChatTurn {
    /// A turn with a fresh random id, stamped now.
    pub fn new(session_id: impl Into<String>, user_message: impl Into<String>) -> Self {
        ChatTurn {
            turn_id: uuid::Uuid::new_v4().to_string(),
            session_id: session_id.into(),
            user_message: user_message.into(),
            timestamp: unix_millis(),
        }
    }
}

/// Provenance of one reply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub capability: Capability,
    pub rbac: AccessDecision,
    /// Present when a graph query was run.
    pub cypher_text: Option<String>,
    pub validation: Option<ValidationReport>,
    pub rows: Option<ResultTable>,
    /// Non-empty when error handling intervened.
    pub anomalies: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub turn_id: String,
    pub reply: String,
    pub explanation: Explanation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rating {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub turn_id: String,
    pub rating: Rating,
    #[serde(default)]
    pub comment: Option<String>,
    pub timestamp: u64,
}

/// One audit-log line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub turn: ChatTurn,
    pub user_id: String,
    pub response: ChatResponse,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TurnError {
    #[error("invalid token")]
    InvalidToken,
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeedbackError {
    #[error("unknown turn {0}")]
    UnknownTurn(String),
    #[error("feedback log failure: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrchestratorConfig {
    /// LIMIT cap enforced by the validation layer.
    pub max_limit: u64,
    pub defaults: RouteDefaults,
    /// Messages of per-session history passed to the LLM.
    pub history_limit: usize,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        OrchestratorConfig { max_limit: DEFAULT_MAX_LIMIT, defaults: RouteDefaults::default(), history_limit: 20 }
    }
}

struct State {
    audit: JsonLinesLog,
    feedback: JsonLinesLog,
    turns: HashSet<String>,
    feedback_records: Vec<FeedbackRecord>,
    histories: HashMap<String, Vec<Message>>,
}

pub struct Orchestrator {
    graph: Graph,
    policy: Policy,
    backend: Box<dyn LlmBackend>,
    config: OrchestratorConfig,
    state: Mutex<State>,
}

/// Everything about a reply except the access decision and capability.
#[derive(Default)]
struct Outcome {
    reply: String,
    cypher_text: Option<String>,
    validation: Option<ValidationReport>,
    rows: Option<ResultTable>,
    anomalies: Vec<String>,
}

impl Outcome {
    fn reply(reply: impl Into<String>) -> Self {
        Outcome { reply: reply.into(), ..Outcome::default() }
    }

    fn anomaly(reply: impl Into<String>, anomaly: impl Into<String>) -> Self {
        Outcome { reply: reply.into(), anomalies: vec![anomaly.into()], ..Outcome::default() }
    }
}

impl Orchestrator {
    /// An orchestrator whose logs live in memory only.
    pub fn new(graph: Graph, policy: Policy, backend: Box<dyn LlmBackend>, config: OrchestratorConfig) -> Self {
        Orchestrator {
            graph,
            policy,
            backend,
            config,
            state: Mutex::new(State {
                audit: JsonLinesLog::in_memory(),
                feedback: JsonLinesLog::in_memory(),
                turns: HashSet::new(),
                feedback_records: Vec::new(),
                histories: HashMap::new(),
            }),
        }
    }

    /// Appends audit and feedback records to the given files. Turns and
    /// feedback already in them stay known.
    pub fn with_logs(self, audit: Option<&Path>, feedback: Option<&Path>) -> std::io::Result<Self> {
        {
            let mut state = self.state.lock().expect("state lock");
            if let Some(path) = audit {
                let known: Vec<AuditRecord> = read_json_lines(path)?;
                state.turns.extend(known.into_iter().map(|r| r.turn.turn_id));
                state.audit = JsonLinesLog::open(path)?;
            }
            if let Some(path) = feedback {
                state.feedback_records = read_json_lines(path)?;
                state.feedback = JsonLinesLog::open(path)?;
            }
        }
        Ok(self)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn config(&self) -> &OrchestratorConfig {
        &self.config
    }

    pub fn authenticate(&self, token: &str) -> Result<Principal, TurnError> {
        authenticate(token, &self.policy).map_err(|_| TurnError::InvalidToken)
    }

    /// Runs one turn end to end and appends it to the audit log.
    pub fn handle_turn(&self, turn: &ChatTurn, token: &str) -> Result<ChatResponse, TurnError> {
        let principal = self.authenticate(token)?;
        let capability = route_prompt_with(&turn.user_message, &self.config.defaults);
        let mut decision = authorize(&principal, capability.kind(), &self.policy);
        if decision.is_grant() && matches!(capability, Capability::Summarize { article_id: Some(_), .. }) {
            if !self.policy.labels_of(&principal).contains(Label::Article.as_str()) {
                decision = AccessDecision {
                    verdict: AccessVerdict::Deny,
                    role_used: None,
                    reason: "summarizing a stored article requires read access to Article nodes".into(),
                };
            }
        }
        let outcome = if decision.is_grant() {
            self.answer(&capability, &principal, turn)
        } else {
            Outcome::reply(format!("Access denied: {}.", decision.reason))
        };
        let response = ChatResponse {
            turn_id: turn.turn_id.clone(),
            reply: outcome.reply,
            explanation: Explanation {
                capability,
                rbac: decision,
                cypher_text: outcome.cypher_text,
                validation: outcome.validation,
                rows: outcome.rows,
                anomalies: outcome.anomalies,
            },
        };
        self.record_turn(turn, &principal, &response)?;
        Ok(response)
    }

    fn record_turn(&self, turn: &ChatTurn, principal: &Principal, response: &ChatResponse) -> Result<(), TurnError> {
        let mut state = self.state.lock().map_err(|_| TurnError::Internal("state lock poisoned".into()))?;
        let record = AuditRecord { turn: turn.clone(), user_id: principal.user_id.clone(), response: response.clone() };
        state.audit.append(&record).map_err(|e| TurnError::Internal(format!("audit log: {e}")))?;
        state.turns.insert(turn.turn_id.clone());
        let limit = self.config.history_limit;
        let history = state.histories.entry(turn.session_id.clone()).or_default();
        history.push(Message::user(turn.user_message.clone()));
        history.push(Message::assistant(response.reply.clone()));
        if history.len() > limit {
            history.drain(..history.len() - limit);
        }
        Ok(())
    }

    fn history(&self, session_id: &str) -> Vec<Message> {
        self.state.lock().map(|s| s.histories.get(session_id).cloned().unwrap_or_default()).unwrap_or_default()
    }

    fn cvl_policy(&self, principal: &Principal) -> CvlPolicy {
        let labels = self.policy.labels_of(principal);
        CvlPolicy::default().with_max_limit(self.config.max_limit).restrict_labels(labels.iter().map(String::as_str))
    }

    fn answer(&self, capability: &Capability, principal: &Principal, turn: &ChatTurn) -> Outcome {
        let policy = self.cvl_policy(principal);
        match capability {
            Capability::GenericResponse => {
                self.ask_llm(LlmRequest::with_history(self.history(&turn.session_id), turn.user_message.clone()))
            }
            Capability::Summarize { article_id: Some(id), .. } => match self.graph.find_article(*id) {
                None => Outcome::anomaly(format!("Article {id} was not found in the knowledge graph."), format!("unknown article {id}")),
                Some(node) => {
                    let content = node.get("content").and_then(PropertyValue::as_text).unwrap_or_default();
                    self.ask_llm(LlmRequest::single(summarize_instruction(content)))
                }
            },
            Capability::Summarize { text, .. } => {
                self.ask_llm(LlmRequest::single(summarize_instruction(text.as_deref().unwrap_or_default())))
            }
            Capability::SimilarArticles { article_id, k } => {
                self.from_capability(capability, find_similar_with(&self.graph, *article_id, *k, &policy).map(|r| r.1))
            }
            Capability::SentimentLookup { article_id } => {
                self.from_capability(capability, get_sentiment_with(&self.graph, *article_id, &policy).map(|r| r.1))
            }
            Capability::TopicPrediction { article_id, threshold } => {
                let result = predict_topic_with(&self.graph, *article_id, *threshold, &policy);
                let mut outcome = self.from_capability(capability, result.map(|r| r.1));
                if outcome.rows.as_ref().is_some_and(ResultTable::is_empty) {
                    let best = find_similar_with(&self.graph, *article_id, 1, &policy)
                        .ok()
                        .and_then(|(list, _)| list.first().map(|s| s.score));
                    outcome.reply = format!(
                        "{NO_DATA_MESSAGE} Article {article_id}: {}.",
                        no_prediction_message(best, *threshold)
                    );
                }
                outcome
            }
            Capability::FactCheck => Outcome::reply(FACT_CHECK_REPLY),
            Capability::IndustryPrediction => Outcome::reply(INDUSTRY_REPLY),
            Capability::RawCypher { query_text } => self.raw_cypher(capability, query_text, &policy),
        }
    }

    fn ask_llm(&self, request: LlmRequest) -> Outcome {
        match self.backend.complete(&request) {
            Ok(response) => Outcome::reply(response.text),
            Err(e) => Outcome::anomaly(LLM_UNAVAILABLE_REPLY, format!("llm backend error: {e}")),
        }
    }

    fn from_capability(&self, capability: &Capability, result: Result<CapabilityRun, CapabilityError>) -> Outcome {
        match result {
            Ok(run) => self.present(capability, run.cypher_text, run.validation, run.rows, Vec::new()),
            Err(CapabilityError::UnknownArticle(id)) => {
                Outcome::anomaly(format!("Article {id} was not found in the knowledge graph."), format!("unknown article {id}"))
            }
            Err(CapabilityError::InvalidArgument(m)) => {
                Outcome::anomaly(format!("The request could not be processed: {m}."), format!("invalid argument: {m}"))
            }
            Err(CapabilityError::Rejected { cypher_text, report }) => Outcome {
                reply: rejection_reply(&report),
                anomalies: vec![format!("validation rejected the capability query: {}", codes(&report))],
                cypher_text: Some(cypher_text),
                validation: Some(report),
                rows: None,
            },
            Err(CapabilityError::Eval { cypher_text, report, error }) => eval_failure(cypher_text, report, error),
            Err(e @ CapabilityError::ResultShape(_)) => {
                Outcome::anomaly("The knowledge graph returned an unexpected result.", e.to_string())
            }
        }
    }

    fn raw_cypher(&self, capability: &Capability, query_text: &str, policy: &CvlPolicy) -> Outcome {
        let run = run_text(query_text, &self.graph, policy);
        match run.execution {
            None => Outcome {
                reply: rejection_reply(&run.report),
                cypher_text: Some(run.cypher_text),
                validation: Some(run.report),
                ..Outcome::default()
            },
            Some(Err(error)) => eval_failure(run.cypher_text, run.report, error),
            Some(Ok(execution)) => {
                let mut anomalies = Vec::new();
                if execution.truncated() && run.report.limit_injected {
                    anomalies.push(format!(
                        "result truncated to {} of {} rows by the injected limit",
                        execution.table.len(),
                        execution.matched_rows
                    ));
                }
                self.present(capability, run.cypher_text, run.report, execution.table, anomalies)
            }
        }
    }

    /// Scans rows for anomalies and renders the reply.
    fn present(
        &self,
        capability: &Capability,
        cypher_text: String,
        validation: ValidationReport,
        rows: ResultTable,
        mut anomalies: Vec<String>,
    ) -> Outcome {
        if rows.is_empty() {
            anomalies.push("empty result set".into());
        }
        for (i, row) in rows.rows.iter().enumerate() {
            for (column, cell) in rows.columns.iter().zip(row) {
                let finite = match cell {
                    PropertyValue::Float(f) => f.is_finite(),
                    PropertyValue::FloatVector(v) => v.iter().all(|f| f.is_finite()),
                    _ => true,
                };
                if !finite {
                    anomalies.push(format!("non-finite value in row {} column {column}", i + 1));
                }
            }
        }
        let reply = if rows.is_empty() {
            NO_DATA_MESSAGE.to_string()
        } else {
            match self.backend.complete(&LlmRequest::single(format_instruction(capability, &rows))) {
                Ok(r) => r.text,
                Err(e) => {
                    anomalies.push(format!("llm backend error: {e}; deterministic rendering used"));
                    render_insights(capability, &rows)
                }
            }
        };
        Outcome { reply, cypher_text: Some(cypher_text), validation: Some(validation), rows: Some(rows), anomalies }
    }

    /// Stores feedback for a turn handled by this service.
    pub fn record_feedback(&self, record: FeedbackRecord) -> Result<(), FeedbackError> {
        let mut state = self.state.lock().map_err(|_| FeedbackError::Io("state lock poisoned".into()))?;
        if !state.turns.contains(&record.turn_id) {
            return Err(FeedbackError::UnknownTurn(record.turn_id));
        }
        state.feedback.append(&record).map_err(|e| FeedbackError::Io(e.to_string()))?;
        state.feedback_records.push(record);
        Ok(())
    }

    pub fn feedback_for(&self, turn_id: &str) -> Vec<FeedbackRecord> {
        self.state
            .lock()
            .map(|s| s.feedback_records.iter().filter(|r| r.turn_id == turn_id).cloned().collect())
            .unwrap_or_default()
    }

    pub fn is_known_turn(&self, turn_id: &str) -> bool {
        self.state.lock().map(|s| s.turns.contains(turn_id)).unwrap_or(false)
    }

    /// Number of turns appended to the audit log by this instance or
    /// present in it at startup.
    pub fn audit_len(&self) -> usize {
        self.state.lock().map(|s| s.audit.len()).unwrap_or(0)
    }

    pub fn flush_logs(&self) -> std::io::Result<()> {
        let mut state = self.state.lock().map_err(|_| std::io::Error::other("state lock poisoned"))?;
        state.audit.flush()?;
        state.feedback.flush()
    }
}

fn codes(report: &ValidationReport) -> String {
    report.codes().iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", ")
}

fn rejection_reply(report: &ValidationReport) -> String {
    let details: Vec<String> = report.violations.iter().map(|v| format!("{} ({})", v.code, v.message)).collect();
    format!("The query was rejected by the validation layer: {}.", details.join("; "))
}

fn eval_failure(cypher_text: String, report: ValidationReport, error: EvalError) -> Outcome {
    let anomaly = match &error {
        EvalError::DimensionMismatch { .. } => format!("dimension mismatch: {error}"),
        _ => format!("evaluation error: {error}"),
    };
    Outcome {
        reply: format!("The knowledge graph query failed: {error}."),
        cypher_text: Some(cypher_text),
        validation: Some(report),
        rows: None,
        anomalies: vec![anomaly],
    }
}
