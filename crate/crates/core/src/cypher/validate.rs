//! Gate between query text and execution. Only read-only queries over the
//! article/topic schema, with bounded literals and a bounded row count, are
//! accepted.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Expr, Query};
use super::lexer::{is_write_keyword, tokenize_partial, TokenKind};
use super::parser::parse;
use crate::graph::{PropertyValue, HAS_TOPIC};

pub const COSINE_FUNCTION: &str = "gds.similarity.cosine";
pub const DEFAULT_MAX_LIMIT: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    WriteClause,
    LexError,
    ParseError,
    UnknownLabel,
    UnknownRelationship,
    UnknownProperty,
    UnknownFunction,
    FunctionArity,
    UnboundVariable,
    PropertyOnValue,
    NodeProjection,
    DuplicateColumn,
    TooManyLiterals,
    LiteralTooLarge,
    LimitExceeded,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::WriteClause => "WRITE_CLAUSE",
            ViolationCode::LexError => "LEX_ERROR",
            ViolationCode::ParseError => "PARSE_ERROR",
            ViolationCode::UnknownLabel => "UNKNOWN_LABEL",
            ViolationCode::UnknownRelationship => "UNKNOWN_RELATIONSHIP",
            ViolationCode::UnknownProperty => "UNKNOWN_PROPERTY",
            ViolationCode::UnknownFunction => "UNKNOWN_FUNCTION",
            ViolationCode::FunctionArity => "FUNCTION_ARITY",
            ViolationCode::UnboundVariable => "UNBOUND_VARIABLE",
            ViolationCode::PropertyOnValue => "PROPERTY_ON_VALUE",
            ViolationCode::NodeProjection => "NODE_PROJECTION",
            ViolationCode::DuplicateColumn => "DUPLICATE_COLUMN",
            ViolationCode::TooManyLiterals => "TOO_MANY_LITERALS",
            ViolationCode::LiteralTooLarge => "LITERAL_TOO_LARGE",
            ViolationCode::LimitExceeded => "LIMIT_EXCEEDED",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
    /// Byte offset in the query text, when the check ran on text.
    pub offset: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accepted,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
    pub effective_limit: u64,
    /// True when the query had no LIMIT and the policy maximum was applied.
    pub limit_injected: bool,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    fn from_violations(violations: Vec<Violation>, effective_limit: u64, limit_injected: bool) -> Self {
        let verdict = if violations.is_empty() { Verdict::Accepted } else { Verdict::Rejected };
        ValidationReport { verdict, violations, effective_limit, limit_injected }
    }
}

/// What the validation layer allows.
#[derive(Clone, Debug, PartialEq)]
pub struct CvlPolicy {
    pub max_limit: u64,
    pub labels: BTreeSet<String>,
    pub relationships: BTreeSet<String>,
    /// Readable properties per label.
    pub properties: BTreeMap<String, BTreeSet<String>>,
    pub functions: BTreeSet<String>,
    pub max_literals: usize,
    pub max_text_bytes: usize,
    pub max_vector_len: usize,
}

pub const ARTICLE_PROPERTIES: &[&str] = &[
    "article_id",
    "title",
    "content",
    "sentiment",
    "compound",
    "content_vector",
    "published_date",
    "publisher",
    "country",
];
pub const TOPIC_PROPERTIES: &[&str] = &["topic_id", "name"];

impl Default for CvlPolicy {
    fn default() -> Self {
        let set = |items: &[&str]| items.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        let mut properties = BTreeMap::new();
        properties.insert("Article".to_string(), set(ARTICLE_PROPERTIES));
        properties.insert("Topic".to_string(), set(TOPIC_PROPERTIES));
        CvlPolicy {
            max_limit: DEFAULT_MAX_LIMIT,
            labels: set(&["Article", "Topic"]),
            relationships: set(&[HAS_TOPIC]),
            properties,
            functions: set(&[COSINE_FUNCTION]),
            max_literals: 32,
            max_text_bytes: 1024,
            max_vector_len: 4096,
        }
    }
}

impl CvlPolicy {
    pub fn with_max_limit(mut self, max_limit: u64) -> Self {
        self.max_limit = max_limit;
        self
    }

    /// Restricts readable labels to `labels` (intersected with the schema).
    pub fn restrict_labels<'a>(mut self, labels: impl IntoIterator<Item = &'a str>) -> Self {
        let allowed: BTreeSet<String> = labels.into_iter().map(str::to_string).collect();
        self.labels.retain(|l| allowed.contains(l));
        self
    }

    fn function_allowed(&self, name: &str) -> bool {
        self.functions.iter().any(|f| f.eq_ignore_ascii_case(name))
    }

    fn property_allowed(&self, label: Option<&str>, name: &str) -> bool {
        match label {
            Some(l) => self.properties.get(l).is_some_and(|p| p.contains(name)),
            None => self
                .labels
                .iter()
                .any(|l| self.properties.get(l).is_some_and(|p| p.contains(name))),
        }
    }
}

/// Outcome of checking raw query text.
#[derive(Clone, Debug)]
pub struct CheckedQuery {
    pub report: ValidationReport,
    /// The parsed query, when parsing got that far.
    pub query: Option<Query>,
}

/// Checks raw text: write keywords and lexical errors are rejected before
/// parsing, then the parsed query goes through [`validate`].
pub fn check_text(text: &str, policy: &CvlPolicy) -> CheckedQuery {
    let (tokens, lex_error) = tokenize_partial(text);
    let mut violations: Vec<Violation> = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Keyword && is_write_keyword(&t.text))
        .map(|t| Violation {
            code: ViolationCode::WriteClause,
            message: format!("write clause {} is not allowed", t.text.to_ascii_uppercase()),
            offset: Some(t.offset),
        })
        .collect();
    if let Some(err) = lex_error {
        violations.push(Violation { code: ViolationCode::LexError, message: err.to_string(), offset: Some(err.offset) });
    }
    if !violations.is_empty() {
        return CheckedQuery {
            report: ValidationReport::from_violations(violations, policy.max_limit, false),
            query: None,
        };
    }
    match parse(&tokens) {
        Ok(query) => CheckedQuery { report: validate(&query, policy), query: Some(query) },
        Err(err) => CheckedQuery {
            report: ValidationReport::from_violations(
                vec![Violation { code: ViolationCode::ParseError, message: err.to_string(), offset: Some(err.offset) }],
                policy.max_limit,
                false,
            ),
            query: None,
        },
    }
}

#[derive(Clone, Debug)]
enum Binding {
    Node(Option<String>),
    Value,
}

/// Validates a parsed query against `policy`. Pure and total.
pub fn validate(query: &Query, policy: &CvlPolicy) -> ValidationReport {
    let mut v = Vec::new();
    let mut push = |code, message: String| v.push(Violation { code, message, offset: None });

    let mut scope: HashMap<String, Binding> = HashMap::new();
    for node in query.node_patterns() {
        if let Some(label) = &node.label {
            if !policy.labels.contains(label) {
                push(ViolationCode::UnknownLabel, format!("label {label} is not readable"));
            }
        }
        for (name, _) in &node.properties {
            if !policy.property_allowed(node.label.as_deref(), name) {
                push(ViolationCode::UnknownProperty, format!("property {name} is not readable"));
            }
        }
        if let Some(var) = &node.variable {
            let entry = scope.entry(var.clone()).or_insert(Binding::Node(None));
            if let (Binding::Node(slot @ None), Some(label)) = (entry, &node.label) {
                *slot = Some(label.clone());
            }
        }
    }
    for path in &query.matches {
        for step in &path.steps {
            if !policy.relationships.contains(&step.rel.kind) {
                push(ViolationCode::UnknownRelationship, format!("relationship {} is not readable", step.rel.kind));
            }
        }
    }

    let check = |expr: &Expr, scope: &HashMap<String, Binding>, push: &mut dyn FnMut(ViolationCode, String)| {
        expr.walk(&mut |e| match e {
            Expr::Variable(name) if !scope.contains_key(name) => {
                push(ViolationCode::UnboundVariable, format!("variable {name} is not bound"));
            }
            Expr::Property { variable, name } => match scope.get(variable) {
                None => push(ViolationCode::UnboundVariable, format!("variable {variable} is not bound")),
                Some(Binding::Value) => {
                    push(ViolationCode::PropertyOnValue, format!("{variable} is not a node"));
                }
                Some(Binding::Node(label)) => {
                    if !policy.property_allowed(label.as_deref(), name) {
                        push(ViolationCode::UnknownProperty, format!("property {name} is not readable"));
                    }
                }
            },
            Expr::Function { name, args } => {
                if !policy.function_allowed(name) {
                    push(ViolationCode::UnknownFunction, format!("function {name} is not allowed"));
                } else if name.eq_ignore_ascii_case(COSINE_FUNCTION) && args.len() != 2 {
                    push(ViolationCode::FunctionArity, format!("{name} takes 2 arguments, got {}", args.len()));
                }
            }
            _ => {}
        });
    };

    if let Some(w) = &query.where_clause {
        check(w, &scope, &mut push);
    }
    for with in &query.with {
        let mut next = HashMap::new();
        for p in &with.projections {
            check(&p.expr, &scope, &mut push);
            let binding = match &p.expr {
                Expr::Variable(name) => scope.get(name).cloned().unwrap_or(Binding::Value),
                _ => Binding::Value,
            };
            next.insert(p.column_name(), binding);
        }
        scope = next;
        if let Some(w) = &with.where_clause {
            check(w, &scope, &mut push);
        }
    }
    let mut columns = BTreeSet::new();
    for p in &query.returns {
        check(&p.expr, &scope, &mut push);
        if let Expr::Variable(name) = &p.expr {
            if matches!(scope.get(name), Some(Binding::Node(_))) {
                push(ViolationCode::NodeProjection, format!("RETURN {name} would expose a whole node; return properties"));
            }
        }
        let column = p.column_name();
        if !columns.insert(column.clone()) {
            push(ViolationCode::DuplicateColumn, format!("column {column} appears twice"));
        }
    }
    let mut order_scope = scope.clone();
    for p in &query.returns {
        order_scope.entry(p.column_name()).or_insert(Binding::Value);
    }
    for item in &query.order_by {
        check(&item.expr, &order_scope, &mut push);
    }

    let literals = query.literals();
    if literals.len() > policy.max_literals {
        push(
            ViolationCode::TooManyLiterals,
            format!("{} literals exceed the maximum of {}", literals.len(), policy.max_literals),
        );
    }
    for lit in literals {
        match lit {
            PropertyValue::Text(s) if s.len() > policy.max_text_bytes => push(
                ViolationCode::LiteralTooLarge,
                format!("text literal of {} bytes exceeds {}", s.len(), policy.max_text_bytes),
            ),
            PropertyValue::FloatVector(xs) if xs.len() > policy.max_vector_len => push(
                ViolationCode::LiteralTooLarge,
                format!("list literal of {} entries exceeds {}", xs.len(), policy.max_vector_len),
            ),
            _ => {}
        }
    }

    let (effective_limit, injected) = match query.limit {
        Some(limit) if limit > policy.max_limit => {
            push(ViolationCode::LimitExceeded, format!("LIMIT {limit} exceeds the maximum of {}", policy.max_limit));
            (policy.max_limit, false)
        }
        Some(limit) => (limit, false),
        None => (policy.max_limit, true),
    };
    ValidationReport::from_violations(v, effective_limit, injected)
}
