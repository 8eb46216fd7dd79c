//! Embedded property graph holding the article/topic knowledge graph.
//!
//! Nodes are numbered from 1 in insertion order and never deleted, so every
//! iteration in this module is in ascending [`NodeId`] order. Article and
//! topic nodes carry a unique integer key (`article_id` / `topic_id`) backed
//! by a hash index.

mod snapshot;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use snapshot::{load_snapshot, save_snapshot, snapshot_from_str, SNAPSHOT_VERSION};

/// Relationship kind linking an article to one of its topics.
pub const HAS_TOPIC: &str = "HAS_TOPIC";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A property value stored on a node.
#[derive(Clone, Debug, PartialEq)]
pub enum PropertyValue {
    Integer(i64),
    Float(f64),
    Text(String),
    FloatVector(Vec<f64>),
    Boolean(bool),
    Null,
}

impl PropertyValue {
    pub fn type_name(&self) -> &'static str {
        match self {
            PropertyValue::Integer(_) => "Integer",
            PropertyValue::Float(_) => "Float",
            PropertyValue::Text(_) => "Text",
            PropertyValue::FloatVector(_) => "FloatVector",
            PropertyValue::Boolean(_) => "Boolean",
            PropertyValue::Null => "Null",
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            PropertyValue::Integer(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            PropertyValue::Float(v) => Some(*v),
            PropertyValue::Integer(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            PropertyValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            PropertyValue::FloatVector(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, PropertyValue::Null)
    }

    /// JSON encoding used by snapshots and the HTTP API.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value;
        match self {
            PropertyValue::Integer(v) => Value::from(*v),
            PropertyValue::Float(v) => {
                serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number)
            }
            PropertyValue::Text(s) => Value::String(s.clone()),
            PropertyValue::FloatVector(v) => Value::Array(
                v.iter()
                    .map(|x| serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number))
                    .collect(),
            ),
            PropertyValue::Boolean(b) => Value::Bool(*b),
            PropertyValue::Null => Value::Null,
        }
    }

    /// Inverse of [`PropertyValue::to_json`]. Numbers written with a
    /// fraction or exponent decode as `Float`, bare integers as `Integer`.
    pub fn from_json(value: &serde_json::Value) -> Result<Self, String> {
        use serde_json::Value;
        match value {
            Value::Null => Ok(PropertyValue::Null),
            Value::Bool(b) => Ok(PropertyValue::Boolean(*b)),
            Value::String(s) => Ok(PropertyValue::Text(s.clone())),
            Value::Number(n) => number_to_property(n),
            Value::Array(items) => items
                .iter()
                .map(|item| match item {
                    Value::Number(n) => n
                        .as_f64()
                        .ok_or_else(|| format!("vector entry {n} is not representable")),
                    other => Err(format!("vector entries must be numbers, found {other}")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(PropertyValue::FloatVector),
            Value::Object(_) => Err("nested objects are not valid property values".to_string()),
        }
    }
}

fn number_to_property(n: &serde_json::Number) -> Result<PropertyValue, String> {
    if n.is_f64() {
        n.as_f64()
            .map(PropertyValue::Float)
            .ok_or_else(|| format!("number {n} is not representable"))
    } else if let Some(i) = n.as_i64() {
        Ok(PropertyValue::Integer(i))
    } else {
        Err(format!("integer {n} does not fit in 64 bits"))
    }
}

impl From<i64> for PropertyValue {
    fn from(v: i64) -> Self {
        PropertyValue::Integer(v)
    }
}

impl From<f64> for PropertyValue {
    fn from(v: f64) -> Self {
        PropertyValue::Float(v)
    }
}

impl From<&str> for PropertyValue {
    fn from(v: &str) -> Self {
        PropertyValue::Text(v.to_string())
    }
}

impl From<String> for PropertyValue {
    fn from(v: String) -> Self {
        PropertyValue::Text(v)
    }
}

impl From<Vec<f64>> for PropertyValue {
    fn from(v: Vec<f64>) -> Self {
        PropertyValue::FloatVector(v)
    }
}

impl From<bool> for PropertyValue {
    fn from(v: bool) -> Self {
        PropertyValue::Boolean(v)
    }
}

pub type Properties = BTreeMap<String, PropertyValue>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Article,
    Topic,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Article, Label::Topic];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Article => "Article",
            Label::Topic => "Topic",
        }
    }

    /// Property holding the unique integer key for nodes of this label.
    pub fn key_property(self) -> &'static str {
        match self {
            Label::Article => "article_id",
            Label::Topic => "topic_id",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Article" => Ok(Label::Article),
            "Topic" => Ok(Label::Topic),
            other => Err(GraphError::UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub label: Label,
    pub properties: Properties,
}

impl Node {
    pub fn get(&self, name: &str) -> Option<&PropertyValue> {
        self.properties.get(name)
    }

    /// The unique key (`article_id` or `topic_id`).
    pub fn key(&self) -> i64 {
        self.properties
            .get(self.label.key_property())
            .and_then(PropertyValue::as_integer)
            .expect("schema guarantees an integer key")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub source: NodeId,
    pub target: NodeId,
    pub kind: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("duplicate {property} {key}")]
    DuplicateKey { property: &'static str, key: i64 },
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown relationship kind {0:?}")]
    UnknownRelationship(String),
    #[error("HAS_TOPIC must link Article -> Topic, got {source_label} -> {target_label}")]
    LabelMismatch { source_label: Label, target_label: Label },
    #[error("edge {from} -> {to} already exists")]
    DuplicateEdge { from: NodeId, to: NodeId },
    #[error("vector dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot format error: {0}")]
    Format(String),
}

/// The article/topic knowledge graph.
#[derive(Clone, Debug)]
pub struct Graph {
    dimension: usize,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    keys: HashMap<(Label, i64), NodeId>,
    out_adj: Vec<BTreeSet<NodeId>>,
    in_adj: Vec<BTreeSet<NodeId>>,
    pairs: HashSet<(NodeId, NodeId)>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Graph {
    /// Creates an empty graph whose article vectors have `dimension` entries.
    pub fn new(dimension: usize) -> Self {
        Graph {
            dimension,
            nodes: Vec::new(),
            edges: Vec::new(),
            keys: HashMap::new(),
            out_adj: Vec::new(),
            in_adj: Vec::new(),
            pairs: HashSet::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.nodes.iter().filter(|n| n.label == label).count()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All nodes in ascending id order.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn get_node(&self, id: NodeId) -> Option<&Node> {
        let idx = usize::try_from(id.0).ok()?.checked_sub(1)?;
        self.nodes.get(idx)
    }

    pub fn create_node(&mut self, label: &str, properties: Properties) -> Result<NodeId, GraphError> {
        let label: Label = label.parse()?;
        self.check_schema(label, &properties)?;
        let key = properties[label.key_property()].as_integer().unwrap_or_default();
        if self.keys.contains_key(&(label, key)) {
            return Err(GraphError::DuplicateKey { property: label.key_property(), key });
        }
        let id = NodeId(self.nodes.len() as u64 + 1);
        self.keys.insert((label, key), id);
        self.nodes.push(Node { id, label, properties });
        self.out_adj.push(BTreeSet::new());
        self.in_adj.push(BTreeSet::new());
        Ok(id)
    }

    pub fn create_edge(&mut self, source: NodeId, target: NodeId, kind: &str) -> Result<EdgeId, GraphError> {
        if kind != HAS_TOPIC {
            return Err(GraphError::UnknownRelationship(kind.to_string()));
        }
        let source_label = self.get_node(source).ok_or(GraphError::UnknownNode(source))?.label;
        let target_label = self.get_node(target).ok_or(GraphError::UnknownNode(target))?.label;
        if source_label != Label::Article || target_label != Label::Topic {
            return Err(GraphError::LabelMismatch { source_label, target_label });
        }
        if !self.pairs.insert((source, target)) {
            return Err(GraphError::DuplicateEdge { from: source, to: target });
        }
        let id = EdgeId(self.edges.len() as u64 + 1);
        self.edges.push(Edge { id, source, target, kind: HAS_TOPIC.to_string() });
        self.out_adj[(source.0 - 1) as usize].insert(target);
        self.in_adj[(target.0 - 1) as usize].insert(source);
        Ok(id)
    }

    /// Replaces or adds one property, re-checking the label schema and
    /// keeping the key index consistent.
    pub fn set_property(&mut self, id: NodeId, name: &str, value: PropertyValue) -> Result<(), GraphError> {
        let node = self.get_node(id).ok_or(GraphError::UnknownNode(id))?;
        let label = node.label;
        let old_key = node.key();
        let mut updated = node.properties.clone();
        updated.insert(name.to_string(), value);
        self.check_schema(label, &updated)?;
        let new_key = updated[label.key_property()].as_integer().unwrap_or_default();
        if new_key != old_key {
            if self.keys.contains_key(&(label, new_key)) {
                return Err(GraphError::DuplicateKey { property: label.key_property(), key: new_key });
            }
            self.keys.remove(&(label, old_key));
            self.keys.insert((label, new_key), id);
        }
        self.nodes[(id.0 - 1) as usize].properties = updated;
        Ok(())
    }

    pub fn find_article(&self, article_id: i64) -> Option<&Node> {
        self.find_by_key(Label::Article, article_id)
    }

    pub fn find_topic(&self, topic_id: i64) -> Option<&Node> {
        self.find_by_key(Label::Topic, topic_id)
    }

    pub fn find_by_key(&self, label: Label, key: i64) -> Option<&Node> {
        self.keys.get(&(label, key)).and_then(|id| self.get_node(*id))
    }

    pub fn nodes_by_label(&self, label: &str) -> Result<Vec<&Node>, GraphError> {
        let label: Label = label.parse()?;
        Ok(self.label_iter(label).collect())
    }

    pub fn label_iter(&self, label: Label) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(move |n| n.label == label)
    }

    pub fn neighbors(&self, id: NodeId, kind: &str, direction: Direction) -> Result<Vec<&Node>, GraphError> {
        if kind != HAS_TOPIC {
            return Err(GraphError::UnknownRelationship(kind.to_string()));
        }
        if self.get_node(id).is_none() {
            return Err(GraphError::UnknownNode(id));
        }
        Ok(self
            .neighbor_ids(id, direction)
            .filter_map(|n| self.get_node(n))
            .collect())
    }

    pub(crate) fn neighbor_ids(&self, id: NodeId, direction: Direction) -> impl Iterator<Item = NodeId> + '_ {
        let adj = match direction {
            Direction::Out => &self.out_adj,
            Direction::In => &self.in_adj,
        };
        adj[(id.0 - 1) as usize].iter().copied()
    }

    pub fn has_edge(&self, source: NodeId, target: NodeId) -> bool {
        self.pairs.contains(&(source, target))
    }

    fn check_schema(&self, label: Label, props: &Properties) -> Result<(), GraphError> {
        fn require<'a>(
            props: &'a Properties,
            name: &str,
            expected: &'static str,
        ) -> Result<&'a PropertyValue, GraphError> {
            match props.get(name) {
                Some(v) if v.type_name() == expected => Ok(v),
                Some(v) => Err(GraphError::SchemaViolation(format!(
                    "property {name} must be {expected}, found {}",
                    v.type_name()
                ))),
                None => Err(GraphError::SchemaViolation(format!("missing required property {name}"))),
            }
        }

        match label {
            Label::Article => {
                require(props, "article_id", "Integer")?;
                require(props, "content", "Text")?;
                require(props, "sentiment", "Text")?;
                let compound = require(props, "compound", "Float")?.as_float().unwrap_or_default();
                if !(-1.0..=1.0).contains(&compound) {
                    return Err(GraphError::SchemaViolation(format!(
                        "compound {compound} outside [-1, 1]"
                    )));
                }
                require(props, "content_vector", "FloatVector")?;
            }
            Label::Topic => {
                require(props, "topic_id", "Integer")?;
                require(props, "name", "Text")?;
            }
        }
        for (name, value) in props {
            match value {
                PropertyValue::Float(f) if !f.is_finite() => {
                    return Err(GraphError::SchemaViolation(format!("property {name} is not finite")));
                }
                PropertyValue::FloatVector(v) => {
                    if v.len() != self.dimension {
                        return Err(GraphError::DimensionMismatch { expected: self.dimension, found: v.len() });
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(GraphError::SchemaViolation(format!(
                            "vector property {name} has non-finite entries"
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}
