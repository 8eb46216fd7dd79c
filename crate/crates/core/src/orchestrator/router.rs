//! Rule-based prompt routing.

use std::sync::OnceLock;

use regex::Regex;

use crate::capabilities::{Capability, DEFAULT_K, DEFAULT_THRESHOLD};

/// Argument defaults applied when the prompt does not state them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RouteDefaults {
    pub k: u64,
    pub threshold: f64,
}

impl Default for RouteDefaults {
    fn default() -> Self {
        RouteDefaults { k: DEFAULT_K, threshold: DEFAULT_THRESHOLD }
    }
}

const RAW_PREFIX: &str = "cypher:";

fn regex(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("valid pattern"))
}

fn article_number(lower: &str) -> Option<i64> {
    static RE: OnceLock<Regex> = OnceLock::new();
    regex(&RE, r"\barticle\s*(?:id\s*)?#?\s*(\d+)").captures(lower)?.get(1)?.as_str().parse().ok()
}

fn requested_k(lower: &str) -> Option<u64> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let caps = regex(&RE, r"\btop\s+(\d+)\b|\b(\d+)\s+(?:most\s+)?similar\b").captures(lower)?;
    caps.get(1).or(caps.get(2))?.as_str().parse().ok().filter(|k| *k >= 1)
}

/// Lowercased with whitespace collapsed; the form rules match against.
pub fn normalize(message: &str) -> String {
    message.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

pub fn route_prompt(message: &str) -> Capability {
    route_prompt_with(message, &RouteDefaults::default())
}

/// First matching rule wins: a leading `cypher:` prefix, then similar
/// articles, sentiment, topic and summarize (each needing an article
/// number except summarize), then fact-check and industry keywords.
pub fn route_prompt_with(message: &str, defaults: &RouteDefaults) -> Capability {
    let trimmed = message.trim();
    if trimmed.get(..RAW_PREFIX.len()).is_some_and(|p| p.eq_ignore_ascii_case(RAW_PREFIX)) {
        return Capability::RawCypher { query_text: trimmed[RAW_PREFIX.len()..].trim().to_string() };
    }
    let lower = normalize(message);
    let article = article_number(&lower);
    if let Some(article_id) = article {
        if lower.contains("similar") {
            return Capability::SimilarArticles { article_id, k: requested_k(&lower).unwrap_or(defaults.k) };
        }
        if lower.contains("sentiment") {
            return Capability::SentimentLookup { article_id };
        }
        if lower.contains("topic") {
            return Capability::TopicPrediction { article_id, threshold: defaults.threshold };
        }
    }
    if let Some(at) = ["summarize", "summarise"].iter().find_map(|w| lower.find(w)) {
        if article.is_some() {
            return Capability::Summarize { article_id: article, text: None };
        }
        return Capability::Summarize { article_id: None, text: Some(text_after_keyword(trimmed, &lower, at)) };
    }
    if ["fact-check", "fact check", "factcheck"].iter().any(|w| lower.contains(w)) {
        return Capability::FactCheck;
    }
    if lower.contains("industry") || lower.contains("industries") {
        return Capability::IndustryPrediction;
    }
    Capability::GenericResponse
}

/// The original-case text following the summarize keyword found at byte
/// `at` of the normalized message.
fn text_after_keyword(original: &str, lower: &str, at: usize) -> String {
    let words_before = lower[..at].split_whitespace().count();
    let rest: Vec<&str> = original.split_whitespace().skip(words_before + 1).collect();
    let rest = rest.join(" ");
    rest.trim_start_matches([':', '-', ' ']).to_string()
}
