use std::time::Instant;

use serde_json::{json, Value};

use super::{BackendConfig, BackendMode, LlmBackend, LlmError, LlmRequest, LlmResponse};

/// Chat-completions client: POSTs `{model, messages, temperature,
/// max_tokens}` and reads `choices[0].message.content`.
pub struct HttpBackend {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    timeout_ms: u64,
}

impl HttpBackend {
    pub fn new(config: &BackendConfig) -> Result<Self, LlmError> {
        config.validate()?;
        let (Some(endpoint), Some(model)) = (config.endpoint.clone(), config.model.clone()) else {
            return Err(LlmError::InvalidConfig("http mode requires an endpoint and a model".into()));
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpBackend { agent, endpoint, model, timeout_ms: config.timeout_ms })
    }

    fn body(&self, request: &LlmRequest) -> Value {
        let mut messages = vec![json!({"role": "system", "content": request.system})];
        messages.extend(request.messages.iter().map(|m| json!({"role": m.role, "content": m.content})));
        json!({
            "model": self.model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        })
    }

    fn map_error(&self, err: ureq::Error) -> LlmError {
        match err {
            ureq::Error::Timeout(_) => LlmError::Timeout(self.timeout_ms),
            ureq::Error::Io(e)
                if matches!(e.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) =>
            {
                LlmError::Timeout(self.timeout_ms)
            }
            other => LlmError::TransportError(other.to_string()),
        }
    }
}

impl LlmBackend for HttpBackend {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        request.validate()?;
        let started = Instant::now();
        let mut response =
            self.agent.post(&self.endpoint).send_json(self.body(request)).map_err(|e| self.map_error(e))?;
        let status = response.status().as_u16();
        let raw = response.body_mut().read_to_string().map_err(|e| self.map_error(e))?;
        if !(200..300).contains(&status) {
            return Err(LlmError::TransportError(format!("backend answered HTTP {status}")));
        }
        let reply: Value =
            serde_json::from_str(&raw).map_err(|e| LlmError::MalformedBackendReply(e.to_string()))?;
        let text = reply
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| LlmError::MalformedBackendReply("missing choices[0].message.content".into()))?;
        if text.trim().is_empty() {
            return Err(LlmError::MalformedBackendReply("empty completion".into()));
        }
        Ok(LlmResponse {
            text: text.to_string(),
            backend: BackendMode::Http,
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }

    fn mode(&self) -> BackendMode {
        BackendMode::Http
    }
}
