//! Knowledge-graph chat engine: property graph, Cypher subset, ingest,
//! capabilities, access control, LLM gateway and turn orchestration.

pub mod capabilities;
pub mod cypher;
pub mod graph;
pub mod ingest;
pub mod llm;
pub mod orchestrator;
pub mod rbac;

pub use capabilities::{Capability, CapabilityError, CapabilityRun, SimilarArticle, TopicPrediction};
pub use cypher::{CvlPolicy, EvalError, Execution, Query, ResultTable, ValidationReport, Verdict, Violation, ViolationCode};
pub use graph::{Edge, EdgeId, Graph, GraphError, Label, Node, NodeId, Properties, PropertyValue};
pub use ingest::{IngestError, IngestSummary, Lexicon, RawArticle, SentimentLabel, SentimentScore};
pub use llm::{BackendConfig, BackendMode, LlmBackend, LlmError, LlmRequest, LlmResponse, MockBackend};
pub use orchestrator::{
    ChatResponse, ChatTurn, Explanation, FeedbackError, FeedbackRecord, Orchestrator, OrchestratorConfig, Rating,
    TurnError,
};
pub use rbac::{AccessDecision, AccessVerdict, CapabilityKind, Policy, Principal, Role};
