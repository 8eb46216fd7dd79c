//! Evaluator for validated queries.
//!
//! Bindings are enumerated slot by slot (slots in order of first appearance
//! in the MATCH patterns, candidates in ascending node id), filtered by
//! WHERE, projected through each WITH, then sorted. Rows that tie on every
//! ORDER BY key are ordered by the keys (`article_id` / `topic_id`) of the
//! bound nodes, slot by slot, so the output never depends on hash order.

use std::cmp::Ordering;

use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use super::ast::{CompareOp, Expr, Query, RelDirection};
use super::similarity::cosine;
use super::validate::COSINE_FUNCTION;
use crate::graph::{Graph, Label, Node, NodeId, PropertyValue};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable {0} is not bound")]
    UnboundVariable(String),
    #[error("{0} is not a node")]
    PropertyOnValue(String),
    #[error("column {0} holds a node; only property values can be returned")]
    NodeInResult(String),
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("{name} expects {expected} arguments, got {found}")]
    FunctionArity { name: String, expected: usize, found: usize },
    #[error("{name} expects vector arguments, got {found}")]
    FunctionType { name: String, found: String },
    #[error("vector dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Rows returned by a query. Every row has one cell per column.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<PropertyValue>>,
}

impl ResultTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell `column` of row `row`, by column name.
    pub fn get(&self, row: usize, column: &str) -> Option<&PropertyValue> {
        let idx = self.column_index(column)?;
        self.rows.get(row)?.get(idx)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "columns": self.columns,
            "rows": self.rows.iter()
                .map(|r| r.iter().map(PropertyValue::to_json).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }

    /// Inverse of [`ResultTable::to_json`].
    pub fn from_json(value: &serde_json::Value) -> Result<Self, String> {
        let columns: Vec<String> = value
            .get("columns")
            .and_then(|c| c.as_array())
            .ok_or("missing columns array")?
            .iter()
            .map(|c| c.as_str().map(str::to_string).ok_or_else(|| format!("column name {c} is not text")))
            .collect::<Result<_, _>>()?;
        let rows = value
            .get("rows")
            .and_then(|r| r.as_array())
            .ok_or("missing rows array")?
            .iter()
            .map(|row| {
                let cells = row.as_array().ok_or("row is not an array")?;
                if cells.len() != columns.len() {
                    return Err(format!("row has {} cells for {} columns", cells.len(), columns.len()));
                }
                cells.iter().map(PropertyValue::from_json).collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        Ok(ResultTable { columns, rows })
    }
}

impl Serialize for ResultTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<serde_json::Value>> =
            self.rows.iter().map(|r| r.iter().map(PropertyValue::to_json).collect()).collect();
        let mut s = serializer.serialize_struct("ResultTable", 2)?;
        s.serialize_field("columns", &self.columns)?;
        s.serialize_field("rows", &rows)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for ResultTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        ResultTable::from_json(&value).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub table: ResultTable,
    /// Number of rows before the limit was applied.
    pub matched_rows: usize,
}

impl Execution {
    pub fn truncated(&self) -> bool {
        self.matched_rows > self.table.rows.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Value {
    Node(NodeId),
    Scalar(PropertyValue),
}

const NULL: Value = Value::Scalar(PropertyValue::Null);

struct Slot {
    name: Option<String>,
    labels: Vec<String>,
    properties: Vec<(String, PropertyValue)>,
}

struct RelConstraint {
    source: usize,
    target: usize,
    kind: String,
}

type Env = Vec<(String, Value)>;

struct Binding {
    env: Env,
    tie: Vec<(u8, i64)>,
}

/// Runs `query` against `graph`, keeping at most `limit` rows.
pub fn execute(query: &Query, graph: &Graph, limit: u64) -> Result<Execution, EvalError> {
    let (slots, rels) = plan(query);
    let candidates: Vec<Vec<&Node>> = slots.iter().map(|s| candidates(s, graph)).collect();

    let mut bindings = Vec::new();
    let mut chosen: Vec<&Node> = Vec::with_capacity(slots.len());
    enumerate(&candidates, &rels, graph, &mut chosen, &mut |nodes| {
        let env = slots
            .iter()
            .zip(nodes)
            .filter_map(|(slot, node)| slot.name.clone().map(|n| (n, Value::Node(node.id))))
            .collect::<Env>();
        let tie = nodes.iter().map(|n| (n.label as u8, n.key())).collect();
        bindings.push(Binding { env, tie });
    });

    let mut filtered = Vec::with_capacity(bindings.len());
    for b in bindings {
        if passes(query.where_clause.as_ref(), &b.env, graph)? {
            filtered.push(b);
        }
    }
    for with in &query.with {
        let mut next = Vec::with_capacity(filtered.len());
        for b in filtered {
            let env = with
                .projections
                .iter()
                .map(|p| Ok((p.column_name(), eval(&p.expr, &b.env, graph)?)))
                .collect::<Result<Env, EvalError>>()?;
            if passes(with.where_clause.as_ref(), &env, graph)? {
                next.push(Binding { env, tie: b.tie });
            }
        }
        filtered = next;
    }

    let columns: Vec<String> = query.returns.iter().map(|p| p.column_name()).collect();
    let mut rows = Vec::with_capacity(filtered.len());
    for b in filtered {
        let mut cells = Vec::with_capacity(columns.len());
        let mut order_env: Env = Vec::with_capacity(columns.len() + b.env.len());
        for (p, column) in query.returns.iter().zip(&columns) {
            match eval(&p.expr, &b.env, graph)? {
                Value::Scalar(v) => {
                    order_env.push((column.clone(), Value::Scalar(v.clone())));
                    cells.push(v);
                }
                Value::Node(_) => return Err(EvalError::NodeInResult(column.clone())),
            }
        }
        order_env.extend(b.env);
        let keys = query
            .order_by
            .iter()
            .map(|item| eval(&item.expr, &order_env, graph))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((keys, b.tie, cells));
    }

    rows.sort_by(|(ka, ta, _), (kb, tb, _)| {
        for (item, (a, b)) in query.order_by.iter().zip(ka.iter().zip(kb)) {
            let ord = sort_cmp(a, b);
            let ord = if item.descending { ord.reverse() } else { ord };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        ta.cmp(tb)
    });

    let matched_rows = rows.len();
    let keep = usize::try_from(query.limit.map_or(limit, |l| l.min(limit))).unwrap_or(usize::MAX);
    let rows = rows.into_iter().take(keep).map(|(_, _, cells)| cells).collect();
    Ok(Execution { table: ResultTable { columns, rows }, matched_rows })
}

fn plan(query: &Query) -> (Vec<Slot>, Vec<RelConstraint>) {
    let mut slots: Vec<Slot> = Vec::new();
    let mut rels = Vec::new();
    let slot_for = |slots: &mut Vec<Slot>, node: &super::ast::NodePattern| -> usize {
        let existing = node
            .variable
            .as_ref()
            .and_then(|v| slots.iter().position(|s| s.name.as_ref() == Some(v)));
        let idx = existing.unwrap_or_else(|| {
            slots.push(Slot { name: node.variable.clone(), labels: Vec::new(), properties: Vec::new() });
            slots.len() - 1
        });
        slots[idx].labels.extend(node.label.iter().cloned());
        slots[idx].properties.extend(node.properties.iter().cloned());
        idx
    };
    for path in &query.matches {
        let mut prev = slot_for(&mut slots, &path.start);
        for step in &path.steps {
            let next = slot_for(&mut slots, &step.node);
            let (source, target) = match step.rel.direction {
                RelDirection::Outgoing => (prev, next),
                RelDirection::Incoming => (next, prev),
            };
            rels.push(RelConstraint { source, target, kind: step.rel.kind.clone() });
            prev = next;
        }
    }
    (slots, rels)
}

fn candidates<'g>(slot: &Slot, graph: &'g Graph) -> Vec<&'g Node> {
    let mut labels = Vec::new();
    for l in &slot.labels {
        match l.parse::<Label>() {
            Ok(label) if !labels.contains(&label) => labels.push(label),
            Ok(_) => {}
            Err(_) => return Vec::new(),
        }
    }
    if labels.len() > 1 {
        return Vec::new();
    }
    let matches_props = |n: &&Node| {
        slot.properties.iter().all(|(k, v)| {
            let actual = n.get(k).cloned().unwrap_or(PropertyValue::Null);
            compare(CompareOp::Eq, &Value::Scalar(actual), &Value::Scalar(v.clone()))
        })
    };
    match labels.first() {
        Some(&label) => {
            let key = slot
                .properties
                .iter()
                .find(|(k, _)| k == label.key_property())
                .and_then(|(_, v)| v.as_integer());
            match key {
                Some(key) => graph.find_by_key(label, key).into_iter().filter(matches_props).collect(),
                None => graph.label_iter(label).filter(matches_props).collect(),
            }
        }
        None => graph.nodes().iter().filter(matches_props).collect(),
    }
}

fn enumerate<'g>(
    candidates: &[Vec<&'g Node>],
    rels: &[RelConstraint],
    graph: &Graph,
    chosen: &mut Vec<&'g Node>,
    emit: &mut impl FnMut(&[&'g Node]),
) {
    let depth = chosen.len();
    if depth == candidates.len() {
        emit(chosen);
        return;
    }
    for &node in &candidates[depth] {
        chosen.push(node);
        let connected = rels
            .iter()
            .filter(|r| r.source.max(r.target) == depth)
            .all(|r| r.kind == crate::graph::HAS_TOPIC && graph.has_edge(chosen[r.source].id, chosen[r.target].id));
        if connected {
            enumerate(candidates, rels, graph, chosen, emit);
        }
        chosen.pop();
    }
}

fn passes(cond: Option<&Expr>, env: &Env, graph: &Graph) -> Result<bool, EvalError> {
    match cond {
        None => Ok(true),
        Some(expr) => Ok(eval(expr, env, graph)? == Value::Scalar(PropertyValue::Boolean(true))),
    }
}

fn lookup<'e>(env: &'e Env, name: &str) -> Option<&'e Value> {
    env.iter().find(|(n, _)| n == name).map(|(_, v)| v)
}

fn eval(expr: &Expr, env: &Env, graph: &Graph) -> Result<Value, EvalError> {
    match expr {
        Expr::Variable(name) => lookup(env, name).cloned().ok_or_else(|| EvalError::UnboundVariable(name.clone())),
        Expr::Property { variable, name } => match lookup(env, variable) {
            None => Err(EvalError::UnboundVariable(variable.clone())),
            Some(Value::Node(id)) => Ok(graph
                .get_node(*id)
                .and_then(|n| n.get(name))
                .map_or(NULL, |v| Value::Scalar(v.clone()))),
            Some(Value::Scalar(PropertyValue::Null)) => Ok(NULL),
            Some(Value::Scalar(_)) => Err(EvalError::PropertyOnValue(variable.clone())),
        },
        Expr::Literal(v) => Ok(Value::Scalar(v.clone())),
        Expr::Compare { op, lhs, rhs } => {
            let l = eval(lhs, env, graph)?;
            let r = eval(rhs, env, graph)?;
            Ok(Value::Scalar(PropertyValue::Boolean(compare(*op, &l, &r))))
        }
        Expr::Function { name, args } => {
            if !name.eq_ignore_ascii_case(COSINE_FUNCTION) {
                return Err(EvalError::UnknownFunction(name.clone()));
            }
            if args.len() != 2 {
                return Err(EvalError::FunctionArity { name: name.clone(), expected: 2, found: args.len() });
            }
            let a = eval(&args[0], env, graph)?;
            let b = eval(&args[1], env, graph)?;
            match (&a, &b) {
                (Value::Scalar(PropertyValue::Null), _) | (_, Value::Scalar(PropertyValue::Null)) => Ok(NULL),
                (Value::Scalar(PropertyValue::FloatVector(x)), Value::Scalar(PropertyValue::FloatVector(y))) => cosine(x, y)
                    .map(|c| Value::Scalar(PropertyValue::Float(c)))
                    .map_err(|e| EvalError::DimensionMismatch { left: e.left, right: e.right }),
                _ => {
                    let bad = if matches!(a, Value::Scalar(PropertyValue::FloatVector(_))) { &b } else { &a };
                    Err(EvalError::FunctionType { name: name.clone(), found: type_name(bad).to_string() })
                }
            }
        }
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Node(_) => "Node",
        Value::Scalar(p) => p.type_name(),
    }
}

/// Comparison with null collapsing to false. Values of different kinds are
/// unequal and unordered.
pub(crate) fn compare(op: CompareOp, l: &Value, r: &Value) -> bool {
    use PropertyValue as P;
    let ordering = match (l, r) {
        (Value::Scalar(P::Null), _) | (_, Value::Scalar(P::Null)) => return false,
        (Value::Node(a), Value::Node(b)) => {
            return match op {
                CompareOp::Eq => a == b,
                CompareOp::Ne => a != b,
                _ => false,
            }
        }
        (Value::Scalar(P::Integer(a)), Value::Scalar(P::Integer(b))) => Some(a.cmp(b)),
        (Value::Scalar(a @ (P::Integer(_) | P::Float(_))), Value::Scalar(b @ (P::Integer(_) | P::Float(_)))) => {
            a.as_float().unwrap_or_default().partial_cmp(&b.as_float().unwrap_or_default())
        }
        (Value::Scalar(P::Text(a)), Value::Scalar(P::Text(b))) => Some(a.cmp(b)),
        (Value::Scalar(P::Boolean(a)), Value::Scalar(P::Boolean(b))) => Some(a.cmp(b)),
        (Value::Scalar(P::FloatVector(a)), Value::Scalar(P::FloatVector(b))) => {
            return match op {
                CompareOp::Eq => a == b,
                CompareOp::Ne => a != b,
                _ => false,
            }
        }
        _ => None,
    };
    match (op, ordering) {
        (CompareOp::Ne, None) => true,
        (_, None) => false,
        (CompareOp::Eq, Some(o)) => o == Ordering::Equal,
        (CompareOp::Ne, Some(o)) => o != Ordering::Equal,
        (CompareOp::Lt, Some(o)) => o == Ordering::Less,
        (CompareOp::Gt, Some(o)) => o == Ordering::Greater,
        (CompareOp::Le, Some(o)) => o != Ordering::Greater,
        (CompareOp::Ge, Some(o)) => o != Ordering::Less,
    }
}

/// Total order used by ORDER BY: nodes, text, booleans, numbers, vectors,
/// then null last.
pub(crate) fn sort_cmp(a: &Value, b: &Value) -> Ordering {
    use PropertyValue as P;
    fn rank(v: &Value) -> u8 {
        match v {
            Value::Node(_) => 0,
            Value::Scalar(P::Text(_)) => 1,
            Value::Scalar(P::Boolean(_)) => 2,
            Value::Scalar(P::Integer(_) | P::Float(_)) => 3,
            Value::Scalar(P::FloatVector(_)) => 4,
            Value::Scalar(P::Null) => 5,
        }
    }
    match (a, b) {
        (Value::Node(x), Value::Node(y)) => x.cmp(y),
        (Value::Scalar(P::Text(x)), Value::Scalar(P::Text(y))) => x.cmp(y),
        (Value::Scalar(P::Boolean(x)), Value::Scalar(P::Boolean(y))) => x.cmp(y),
        (Value::Scalar(P::Integer(x)), Value::Scalar(P::Integer(y))) => x.cmp(y),
        (Value::Scalar(x @ (P::Integer(_) | P::Float(_))), Value::Scalar(y @ (P::Integer(_) | P::Float(_)))) => {
            x.as_float().unwrap_or_default().total_cmp(&y.as_float().unwrap_or_default())
        }
        (Value::Scalar(P::FloatVector(x)), Value::Scalar(P::FloatVector(y))) => {
            for (p, q) in x.iter().zip(y) {
                let o = p.total_cmp(q);
                if o != Ordering::Equal {
                    return o;
                }
            }
            x.len().cmp(&y.len())
        }
        _ => rank(a).cmp(&rank(b)),
    }
}
