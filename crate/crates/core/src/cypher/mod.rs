//! Read-only Cypher subset: lexer, parser, validation layer and evaluator.
//!
//! Supported shape:
//!
//! ```text
//! MATCH pattern (, pattern)* [WHERE cmp]
//! (WITH projection (, projection)* [WHERE cmp])*
//! RETURN projection (, projection)*
//! [ORDER BY expr [ASC|DESC] (, ...)*] [LIMIT n]
//! ```
//!
//! Patterns are `(var:Label {key: literal})` nodes joined by
//! `-[:KIND]->` or `<-[:KIND]-`. The only function is
//! `gds.similarity.cosine`.

pub mod ast;
mod exec;
pub mod lexer;
mod parser;
mod similarity;
mod validate;

use thiserror::Error;

pub use ast::Query;
pub use exec::{execute, EvalError, Execution, ResultTable};
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse, ParseError};
pub use similarity::{cosine, DimensionMismatch};
pub use validate::{
    check_text, validate, CheckedQuery, CvlPolicy, ValidationReport, Verdict, Violation, ViolationCode,
    ARTICLE_PROPERTIES, COSINE_FUNCTION, DEFAULT_MAX_LIMIT, TOPIC_PROPERTIES,
};

use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Tokenizes and parses `text`.
pub fn parse_text(text: &str) -> Result<Query, SyntaxError> {
    Ok(parse(&tokenize(text)?)?)
}

/// Outcome of running query text through validation and, if accepted,
/// execution.
#[derive(Clone, Debug)]
pub struct QueryRun {
    /// Canonical text of the parsed query, or the raw text if it did not parse.
    pub cypher_text: String,
    pub report: ValidationReport,
    pub execution: Option<Result<Execution, EvalError>>,
}

/// Validates `text` under `policy` and executes it when accepted.
pub fn run_text(text: &str, graph: &Graph, policy: &CvlPolicy) -> QueryRun {
    let checked = check_text(text, policy);
    let cypher_text = checked.query.as_ref().map_or_else(|| text.trim().to_string(), |q| q.to_string());
    let execution = match (&checked.query, checked.report.is_accepted()) {
        (Some(query), true) => Some(execute(query, graph, checked.report.effective_limit)),
        _ => None,
    };
    QueryRun { cypher_text, report: checked.report, execution }
}
