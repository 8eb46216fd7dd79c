//! Turns raw news records into the knowledge graph.

mod embed;
mod preprocess;
mod sentiment;

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use embed::{embed, fnv1a64, subword_features, EmbeddingVector, DEFAULT_DIMENSION};
pub use preprocess::preprocess;
pub use sentiment::{
    compound_from_sum, label_for, score_sentiment, Lexicon, LexiconError, SentimentLabel, SentimentScore,
    NEGATION_SCALAR, NEGATION_WORDS, NORMALIZATION_ALPHA,
};

use crate::graph::{Graph, GraphError, NodeId, Properties, PropertyValue, HAS_TOPIC};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicRef {
    pub topic_id: i64,
    pub name: String,
}

/// One line of the input feed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawArticle {
    pub article_id: i64,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub content: String,
    #[serde(default)]
    pub published_date: String,
    #[serde(default)]
    pub publisher: String,
    #[serde(default)]
    pub country: String,
    #[serde(default)]
    pub topics: Vec<TopicRef>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("embedding dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Reads a JSON Lines feed. Blank lines are skipped; line numbers in errors
/// are 1-based.
pub fn read_jsonl(reader: impl BufRead) -> Result<Vec<RawArticle>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let article = serde_json::from_str(&line)
            .map_err(|e| IngestError::MalformedLine { line: i + 1, message: e.to_string() })?;
        out.push(article);
    }
    Ok(out)
}

/// Derived fields of one article, computed before anything is committed.
#[derive(Clone, Debug, PartialEq)]
pub struct ArticleFeatures {
    pub sentiment: SentimentScore,
    pub embedding: EmbeddingVector,
}

pub fn article_features(content: &str, dimension: usize, lexicon: &Lexicon) -> ArticleFeatures {
    let tokens = preprocess(content);
    ArticleFeatures { sentiment: score_sentiment(&tokens, lexicon), embedding: embed(&tokens, dimension) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IngestSummary {
    pub articles: usize,
    pub topics: usize,
    pub edges: usize,
}

impl std::fmt::Display for IngestSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ingested {} articles, {} topics, {} edges", self.articles, self.topics, self.edges)
    }
}

impl IngestSummary {
    pub fn of(graph: &Graph) -> Self {
        IngestSummary {
            articles: graph.count_label(crate::graph::Label::Article),
            topics: graph.count_label(crate::graph::Label::Topic),
            edges: graph.edge_count(),
        }
    }
}

/// Builds the graph: one Article node per record, one Topic node per
/// distinct `topic_id` (named by its first occurrence), one HAS_TOPIC edge
/// per assignment. Nodes are numbered in input order, each article
/// followed by its not-yet-seen topics.
pub fn build_graph(articles: &[RawArticle], dimension: usize, lexicon: &Lexicon) -> Result<Graph, IngestError> {
    if dimension < 2 {
        return Err(IngestError::InvalidDimension(dimension));
    }
    let mut graph = Graph::new(dimension);
    let mut topics: HashMap<i64, NodeId> = HashMap::new();
    for raw in articles {
        let features = article_features(&raw.content, dimension, lexicon);
        let mut props = Properties::new();
        props.insert("article_id".into(), PropertyValue::Integer(raw.article_id));
        props.insert("title".into(), raw.title.clone().into());
        props.insert("content".into(), raw.content.clone().into());
        props.insert("sentiment".into(), features.sentiment.label.as_str().into());
        props.insert("compound".into(), features.sentiment.compound.into());
        props.insert("content_vector".into(), features.embedding.values.into());
        props.insert("published_date".into(), raw.published_date.clone().into());
        props.insert("publisher".into(), raw.publisher.clone().into());
        props.insert("country".into(), raw.country.clone().into());
        let article = graph.create_node("Article", props)?;
        for topic in &raw.topics {
            let node = match topics.get(&topic.topic_id) {
                Some(id) => *id,
                None => {
                    let mut props = Properties::new();
                    props.insert("topic_id".into(), PropertyValue::Integer(topic.topic_id));
                    props.insert("name".into(), topic.name.clone().into());
                    let id = graph.create_node("Topic", props)?;
                    topics.insert(topic.topic_id, id);
                    id
                }
            };
            graph.create_edge(article, node, HAS_TOPIC)?;
        }
    }
    Ok(graph)
}
