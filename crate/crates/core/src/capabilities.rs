//! Knowledge-graph capabilities. Each one instantiates a fixed query
//! template, runs it through validation and execution, and returns both a
//! typed result and the exact query that produced it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cypher::{run_text, CvlPolicy, EvalError, ResultTable, ValidationReport};
use crate::graph::{Graph, PropertyValue};
use crate::ingest::{label_for, SentimentLabel, SentimentScore};
use crate::rbac::CapabilityKind;

pub const DEFAULT_K: u64 = 5;
pub const DEFAULT_THRESHOLD: f64 = 0.97;

/// Top five articles resembling article 100, as published.
pub const SIMILAR_ARTICLES_QUERY: &str = "MATCH (a1:Article {article_id: 100}), (a2:Article)
WHERE a1 <> a2
WITH a1, a2, gds.similarity.cosine
(a1.content_vector, a2.content_vector) AS similarity_score
RETURN similarity_score, a1.article_id, a2.article_id
ORDER BY similarity_score DESC LIMIT 5";

/// Sentiment of article 100, as published.
pub const SENTIMENT_QUERY: &str = "MATCH (n:Article) WHERE n.article_id = 100
RETURN n.sentiment";

/// Topic inference for article 100, as published. `t` is never bound, so
/// validation rejects it.
pub const TOPIC_QUERY_AS_PRINTED: &str = "MATCH (a1:Article {article_id: 100}), (a2:Article)
WHERE a1 <> a2
WITH a1, a2, gds.similarity.cosine(
a1.content_vector, a2.content_vector) AS similarity_score
WHERE similarity_score > 0.97
RETURN a1.article_id, a2.article_id AS similar_article, t.name AS predicted_topic, similarity_score LIMIT 1";

/// Topic inference with `t` bound through the neighbour's HAS_TOPIC edge
/// and the best match selected explicitly.
pub const TOPIC_QUERY: &str = "MATCH (a1:Article {article_id: 100}), (a2:Article)-[:HAS_TOPIC]->(t:Topic)
WHERE a1 <> a2
WITH a1, a2, t, gds.similarity.cosine(a1.content_vector, a2.content_vector) AS similarity_score
WHERE similarity_score > 0.97
RETURN a1.article_id, a2.article_id AS similar_article, t.name AS predicted_topic, similarity_score
ORDER BY similarity_score DESC LIMIT 1";

pub fn similar_articles_text(article_id: i64, k: u64) -> String {
    format!(
        "MATCH (a1:Article {{article_id: {article_id}}}), (a2:Article)\n\
         WHERE a1 <> a2\n\
         WITH a1, a2, gds.similarity.cosine(a1.content_vector, a2.content_vector) AS similarity_score\n\
         RETURN similarity_score, a1.article_id, a2.article_id\n\
         ORDER BY similarity_score DESC LIMIT {k}"
    )
}

pub fn sentiment_text(article_id: i64) -> String {
    format!("MATCH (n:Article) WHERE n.article_id = {article_id}\nRETURN n.sentiment, n.compound")
}

pub fn topic_text(article_id: i64, threshold: f64) -> String {
    format!(
        "MATCH (a1:Article {{article_id: {article_id}}}), (a2:Article)-[:HAS_TOPIC]->(t:Topic)\n\
         WHERE a1 <> a2\n\
         WITH a1, a2, t, gds.similarity.cosine(a1.content_vector, a2.content_vector) AS similarity_score\n\
         WHERE similarity_score > {threshold:?}\n\
         RETURN a1.article_id, a2.article_id AS similar_article, t.name AS predicted_topic, similarity_score\n\
         ORDER BY similarity_score DESC LIMIT 1"
    )
}

/// A routed request: the capability kind plus its arguments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Capability {
    GenericResponse,
    /// Summarizes a stored article when `article_id` is set, otherwise `text`.
    Summarize {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        article_id: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        text: Option<String>,
    },
    SimilarArticles { article_id: i64, k: u64 },
    SentimentLookup { article_id: i64 },
    TopicPrediction { article_id: i64, threshold: f64 },
    FactCheck,
    IndustryPrediction,
    RawCypher { query_text: String },
}

impl Capability {
    pub fn kind(&self) -> CapabilityKind {
        match self {
            Capability::GenericResponse => CapabilityKind::GenericResponse,
            Capability::Summarize { .. } => CapabilityKind::Summarize,
            Capability::SimilarArticles { .. } => CapabilityKind::SimilarArticles,
            Capability::SentimentLookup { .. } => CapabilityKind::SentimentLookup,
            Capability::TopicPrediction { .. } => CapabilityKind::TopicPrediction,
            Capability::FactCheck => CapabilityKind::FactCheck,
            Capability::IndustryPrediction => CapabilityKind::IndustryPrediction,
            Capability::RawCypher { .. } => CapabilityKind::RawCypher,
        }
    }

    pub fn article_id(&self) -> Option<i64> {
        match self {
            Capability::Summarize { article_id, .. } => *article_id,
            Capability::SimilarArticles { article_id, .. }
            | Capability::SentimentLookup { article_id }
            | Capability::TopicPrediction { article_id, .. } => Some(*article_id),
            _ => None,
        }
    }
}

/// Explains an absent topic prediction given the best similarity to any
/// other article.
pub fn no_prediction_message(max_similarity: Option<f64>, threshold: f64) -> String {
    match max_similarity {
        None => "no topic prediction (no other articles)".to_string(),
        Some(max) if max <= threshold => {
            format!("no topic prediction (max similarity {max:.2} \u{2264} {threshold:.2})")
        }
        Some(max) => format!(
            "no topic prediction (no article scoring above {threshold:.2} has a topic; max similarity {max:.2})"
        ),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarArticle {
    pub article_id: i64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicPrediction {
    pub topic_name: String,
    pub via_article: i64,
    pub score: f64,
}

/// The query a capability executed, its validation report and its rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapabilityRun {
    pub cypher_text: String,
    pub validation: ValidationReport,
    pub rows: ResultTable,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapabilityError {
    #[error("article {0} does not exist")]
    UnknownArticle(i64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("query rejected by validation: {}", .report.codes().iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", "))]
    Rejected { cypher_text: String, report: ValidationReport },
    #[error("query failed: {error}")]
    Eval { cypher_text: String, report: ValidationReport, error: EvalError },
    #[error("unexpected result shape: {0}")]
    ResultShape(String),
}

impl CapabilityError {
    /// The executed query text, when the failure happened after templating.
    pub fn cypher_text(&self) -> Option<&str> {
        match self {
            CapabilityError::Rejected { cypher_text, .. } | CapabilityError::Eval { cypher_text, .. } => {
                Some(cypher_text)
            }
            _ => None,
        }
    }

    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            CapabilityError::Rejected { report, .. } | CapabilityError::Eval { report, .. } => Some(report),
            _ => None,
        }
    }
}

fn run(text: &str, graph: &Graph, policy: &CvlPolicy) -> Result<CapabilityRun, CapabilityError> {
    let outcome = run_text(text, graph, policy);
    match outcome.execution {
        None => Err(CapabilityError::Rejected { cypher_text: outcome.cypher_text, report: outcome.report }),
        Some(Err(error)) => {
            Err(CapabilityError::Eval { cypher_text: outcome.cypher_text, report: outcome.report, error })
        }
        Some(Ok(execution)) => {
            Ok(CapabilityRun { cypher_text: outcome.cypher_text, validation: outcome.report, rows: execution.table })
        }
    }
}

fn require_article(graph: &Graph, article_id: i64) -> Result<(), CapabilityError> {
    graph.find_article(article_id).map(|_| ()).ok_or(CapabilityError::UnknownArticle(article_id))
}

fn cell<'a>(rows: &'a ResultTable, row: usize, column: &str) -> Result<&'a PropertyValue, CapabilityError> {
    rows.get(row, column).ok_or_else(|| CapabilityError::ResultShape(format!("missing column {column}")))
}

fn int_cell(rows: &ResultTable, row: usize, column: &str) -> Result<i64, CapabilityError> {
    cell(rows, row, column)?.as_integer().ok_or_else(|| CapabilityError::ResultShape(format!("{column} is not an integer")))
}

fn float_cell(rows: &ResultTable, row: usize, column: &str) -> Result<f64, CapabilityError> {
    cell(rows, row, column)?.as_float().ok_or_else(|| CapabilityError::ResultShape(format!("{column} is not a number")))
}

/// `policy` with its LIMIT cap raised to admit `k`.
fn policy_for_k(policy: &CvlPolicy, k: u64) -> CvlPolicy {
    let mut policy = policy.clone();
    policy.max_limit = policy.max_limit.max(k);
    policy
}

pub fn find_similar(graph: &Graph, article_id: i64, k: u64) -> Result<(Vec<SimilarArticle>, CapabilityRun), CapabilityError> {
    find_similar_with(graph, article_id, k, &policy_for_k(&CvlPolicy::default(), k))
}

/// The `k` articles most similar to `article_id`, best first, ties broken
/// by ascending article id. Only the query article in the graph gives an
/// empty list. A `k` above the policy's LIMIT cap is rejected by validation.
pub fn find_similar_with(
    graph: &Graph,
    article_id: i64,
    k: u64,
    policy: &CvlPolicy,
) -> Result<(Vec<SimilarArticle>, CapabilityRun), CapabilityError> {
    if k == 0 {
        return Err(CapabilityError::InvalidArgument("k must be at least 1".into()));
    }
    require_article(graph, article_id)?;
    let run = run(&similar_articles_text(article_id, k), graph, policy)?;
    let mut out = Vec::with_capacity(run.rows.len());
    for i in 0..run.rows.len() {
        out.push(SimilarArticle {
            article_id: int_cell(&run.rows, i, "a2.article_id")?,
            score: float_cell(&run.rows, i, "similarity_score")?,
        });
    }
    Ok((out, run))
}

pub fn get_sentiment(graph: &Graph, article_id: i64) -> Result<(SentimentScore, CapabilityRun), CapabilityError> {
    get_sentiment_with(graph, article_id, &CvlPolicy::default())
}

/// The stored sentiment label and compound of `article_id`.
pub fn get_sentiment_with(
    graph: &Graph,
    article_id: i64,
    policy: &CvlPolicy,
) -> Result<(SentimentScore, CapabilityRun), CapabilityError> {
    require_article(graph, article_id)?;
    let run = run(&sentiment_text(article_id), graph, policy)?;
    if run.rows.len() != 1 {
        return Err(CapabilityError::ResultShape(format!("expected one row, got {}", run.rows.len())));
    }
    let compound = float_cell(&run.rows, 0, "n.compound")?;
    let label = cell(&run.rows, 0, "n.sentiment")?
        .as_text()
        .and_then(SentimentLabel::parse)
        .unwrap_or_else(|| label_for(compound));
    Ok((SentimentScore { compound, label }, run))
}

pub fn predict_topic(
    graph: &Graph,
    article_id: i64,
    threshold: f64,
) -> Result<(Option<TopicPrediction>, CapabilityRun), CapabilityError> {
    predict_topic_with(graph, article_id, threshold, &CvlPolicy::default())
}

/// A topic of the most similar article scoring strictly above `threshold`
/// that has any topic. The graph is not modified.
pub fn predict_topic_with(
    graph: &Graph,
    article_id: i64,
    threshold: f64,
    policy: &CvlPolicy,
) -> Result<(Option<TopicPrediction>, CapabilityRun), CapabilityError> {
    if !threshold.is_finite() {
        return Err(CapabilityError::InvalidArgument(format!("threshold must be finite, got {threshold}")));
    }
    require_article(graph, article_id)?;
    let run = run(&topic_text(article_id, threshold), graph, policy)?;
    if run.rows.is_empty() {
        return Ok((None, run));
    }
    let topic_name = cell(&run.rows, 0, "predicted_topic")?
        .as_text()
        .ok_or_else(|| CapabilityError::ResultShape("predicted_topic is not text".into()))?
        .to_string();
    let prediction = TopicPrediction {
        topic_name,
        via_article: int_cell(&run.rows, 0, "similar_article")?,
        score: float_cell(&run.rows, 0, "similarity_score")?,
    };
    Ok((Some(prediction), run))
}
