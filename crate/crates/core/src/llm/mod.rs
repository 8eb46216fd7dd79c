//! One interface over language-model backends: a deterministic mock and an
//! HTTP chat-completions client.

mod http;
mod mock;
mod render;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::HttpBackend;
pub use mock::{first_sentences, MockBackend, GENERIC_PREFIX};
pub use render::{render_insights, render_value, NO_DATA_MESSAGE};

use crate::capabilities::Capability;
use crate::cypher::ResultTable;

pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;
pub const SUMMARIZE_PREFIX: &str = "Summarize the following text in two sentences.";
pub const FORMAT_PREFIX: &str = "Format these knowledge-graph insights for the user.";
pub const SYSTEM_PROMPT: &str = "You are a news assistant for AI industry articles. Answer concisely.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: ChatRole,
    pub content: String,
}

impl Message {
    pub fn user(content: impl Into<String>) -> Self {
        Message { role: ChatRole::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Message { role: ChatRole::Assistant, content: content.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub system: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl LlmRequest {
    /// A single-message request with the default system prompt.
    pub fn single(content: impl Into<String>) -> Self {
        Self::with_history(Vec::new(), content)
    }

    /// `history` followed by a new user message.
    pub fn with_history(mut history: Vec<Message>, content: impl Into<String>) -> Self {
        history.push(Message::user(content));
        LlmRequest { system: SYSTEM_PROMPT.into(), messages: history, temperature: 0.0, max_tokens: 512 }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        let last = self.messages.last().ok_or_else(|| LlmError::InvalidRequest("no messages".into()))?;
        if last.role != ChatRole::User {
            return Err(LlmError::InvalidRequest("last message must come from the user".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(LlmError::InvalidRequest(format!("temperature {} is invalid", self.temperature)));
        }
        Ok(())
    }

    pub fn last_user_message(&self) -> &str {
        self.messages.last().map_or("", |m| m.content.as_str())
    }
}

/// Instruction asking for a summary of `text`.
pub fn summarize_instruction(text: &str) -> String {
    format!("{SUMMARIZE_PREFIX}\n\"\"\"\n{text}\n\"\"\"")
}

/// Instruction asking for `rows` to be presented as an answer to `capability`.
pub fn format_instruction(capability: &Capability, rows: &ResultTable) -> String {
    let capability = serde_json::to_string(capability).expect("capability serializes");
    format!("{FORMAT_PREFIX}\ncapability: {capability}\nrows: {}", rows.to_json())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Mock,
    Http,
}

impl BackendMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendMode::Mock => "mock",
            BackendMode::Http => "http",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    pub backend: BackendMode,
    pub latency_ms: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
    #[error("backend timed out after {0} ms")]
    Timeout(u64),
    #[error("transport error: {0}")]
    TransportError(String),
    #[error("malformed backend reply: {0}")]
    MalformedBackendReply(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub mode: BackendMode,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub timeout_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig { mode: BackendMode::Mock, endpoint: None, model: None, timeout_ms: DEFAULT_TIMEOUT_MS }
    }
}

impl BackendConfig {
    pub fn http(endpoint: impl Into<String>, model: impl Into<String>, timeout_ms: u64) -> Self {
        BackendConfig {
            mode: BackendMode::Http,
            endpoint: Some(endpoint.into()),
            model: Some(model.into()),
            timeout_ms,
        }
    }

    /// Reads KGCHAT_LLM_MODE, KGCHAT_LLM_URL and KGCHAT_LLM_MODEL.
    pub fn from_env() -> Result<Self, LlmError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, LlmError> {
        let mode = match lookup("KGCHAT_LLM_MODE").as_deref().map(str::trim) {
            None | Some("") | Some("mock") => BackendMode::Mock,
            Some("http") => BackendMode::Http,
            Some(other) => return Err(LlmError::InvalidConfig(format!("unknown KGCHAT_LLM_MODE {other:?}"))),
        };
        let config = BackendConfig {
            mode,
            endpoint: lookup("KGCHAT_LLM_URL").filter(|s| !s.is_empty()),
            model: lookup("KGCHAT_LLM_MODEL").filter(|s| !s.is_empty()),
            timeout_ms: DEFAULT_TIMEOUT_MS,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.mode == BackendMode::Http {
            if self.endpoint.is_none() {
                return Err(LlmError::InvalidConfig("http mode requires an endpoint URL".into()));
            }
            if self.model.is_none() {
                return Err(LlmError::InvalidConfig("http mode requires a model name".into()));
            }
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }
}

pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError>;
    fn mode(&self) -> BackendMode;
}

pub fn backend_from_config(config: &BackendConfig) -> Result<Box<dyn LlmBackend>, LlmError> {
    config.validate()?;
    Ok(match config.mode {
        BackendMode::Mock => Box::new(MockBackend),
        BackendMode::Http => Box::new(HttpBackend::new(config)?),
    })
}

/// Sends `request` to the backend described by `config`.
pub fn complete(request: &LlmRequest, config: &BackendConfig) -> Result<LlmResponse, LlmError> {
    backend_from_config(config)?.complete(request)
}
