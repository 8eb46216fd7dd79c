use super::{
    render_insights, BackendMode, LlmBackend, LlmError, LlmRequest, LlmResponse, FORMAT_PREFIX, SUMMARIZE_PREFIX,
};
use crate::capabilities::Capability;
use crate::cypher::ResultTable;

pub const GENERIC_PREFIX: &str = "I can help with AI news questions. You asked: ";

/// Deterministic stand-in: a pure function of the request.
#[derive(Clone, Copy, Debug, Default)]
pub struct MockBackend;

impl LlmBackend for MockBackend {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        request.validate()?;
        let message = request.last_user_message();
        let text = if let Some(rest) = message.strip_prefix(SUMMARIZE_PREFIX) {
            summarize(rest)
        } else if let Some(rest) = message.strip_prefix(FORMAT_PREFIX) {
            format_rows(rest)?
        } else {
            format!("{GENERIC_PREFIX}{}", message.split_whitespace().collect::<Vec<_>>().join(" "))
        };
        Ok(LlmResponse { text, backend: BackendMode::Mock, latency_ms: 0 })
    }

    fn mode(&self) -> BackendMode {
        BackendMode::Mock
    }
}

fn summarize(rest: &str) -> String {
    let quoted = match (rest.find("\"\"\""), rest.rfind("\"\"\"")) {
        (Some(start), Some(end)) if end > start => &rest[start + 3..end],
        _ => rest,
    };
    let summary = first_sentences(quoted, 2);
    if summary.is_empty() {
        "Summary: there is no content to summarize.".to_string()
    } else {
        format!("Summary: {summary}")
    }
}

fn format_rows(rest: &str) -> Result<String, LlmError> {
    let field = |name: &str| {
        rest.lines()
            .find_map(|l| l.strip_prefix(name))
            .ok_or_else(|| LlmError::InvalidRequest(format!("formatting request lacks {name:?}")))
    };
    let capability: Capability = serde_json::from_str(field("capability: ")?)
        .map_err(|e| LlmError::InvalidRequest(format!("bad capability: {e}")))?;
    let rows: serde_json::Value =
        serde_json::from_str(field("rows: ")?).map_err(|e| LlmError::InvalidRequest(format!("bad rows: {e}")))?;
    let rows = ResultTable::from_json(&rows).map_err(LlmError::InvalidRequest)?;
    Ok(render_insights(&capability, &rows))
}

/// The first `n` sentences of `text` with whitespace collapsed. A sentence
/// ends at `.`, `!` or `?` followed by whitespace or the end of the text.
pub fn first_sentences(text: &str, n: usize) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    let mut taken = Vec::new();
    let mut count = 0;
    for word in words {
        if count == n {
            break;
        }
        taken.push(word);
        if word.ends_with(['.', '!', '?']) {
            count += 1;
        }
    }
    taken.join(" ")
}
