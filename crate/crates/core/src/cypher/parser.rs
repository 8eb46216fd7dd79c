use thiserror::Error;

use super::ast::*;
use super::lexer::{Token, TokenKind};
use crate::graph::PropertyValue;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("expected {expected}, found {found} at offset {offset}")]
pub struct ParseError {
    pub expected: String,
    pub found: String,
    pub offset: usize,
}

/// Parses a full query from the token list produced by
/// [`tokenize`](super::lexer::tokenize).
pub fn parse(tokens: &[Token]) -> Result<Query, ParseError> {
    let end = tokens.last().map_or(0, |t| t.offset + t.text.len());
    let mut p = Parser { tokens, pos: 0, end };
    let query = p.query()?;
    if let Some(tok) = p.peek() {
        return Err(ParseError { expected: "end of query".into(), found: tok.to_string(), offset: tok.offset });
    }
    Ok(query)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, ahead: usize) -> Option<&'a Token> {
        self.tokens.get(self.pos + ahead)
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        match self.peek() {
            Some(tok) => ParseError { expected: expected.into(), found: tok.to_string(), offset: tok.offset },
            None => ParseError { expected: expected.into(), found: "end of query".into(), offset: self.end },
        }
    }

    fn at_keyword(&self, word: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(word))
    }

    fn at_symbol(&self, sym: &str) -> bool {
        self.peek().is_some_and(|t| t.is_symbol(sym))
    }

    fn eat_keyword(&mut self, word: &str) -> bool {
        let hit = self.at_keyword(word);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_symbol(&mut self, sym: &str) -> bool {
        let hit = self.at_symbol(sym);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), ParseError> {
        if self.eat_keyword(word) {
            Ok(())
        } else {
            Err(self.error(word))
        }
    }

    fn expect_symbol(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat_symbol(sym) {
            Ok(())
        } else {
            Err(self.error(format!("'{sym}'")))
        }
    }

    fn identifier(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                self.pos += 1;
                Ok(t.text.clone())
            }
            _ => Err(self.error(what)),
        }
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        self.expect_keyword("MATCH")?;
        let mut matches = vec![self.pattern_path()?];
        while self.eat_symbol(",") {
            matches.push(self.pattern_path()?);
        }
        let where_clause = if self.eat_keyword("WHERE") { Some(self.expr()?) } else { None };
        let mut with = Vec::new();
        while self.eat_keyword("WITH") {
            let projections = self.projections(true)?;
            let where_clause = if self.eat_keyword("WHERE") { Some(self.expr()?) } else { None };
            with.push(WithClause { projections, where_clause });
        }
        self.expect_keyword("RETURN")?;
        let returns = self.projections(false)?;
        let mut order_by = Vec::new();
        if self.eat_keyword("ORDER") {
            self.expect_keyword("BY")?;
            loop {
                let expr = self.expr()?;
                let descending = if self.eat_keyword("DESC") || self.eat_keyword("DESCENDING") {
                    true
                } else {
                    let _ = self.eat_keyword("ASC") || self.eat_keyword("ASCENDING");
                    false
                };
                order_by.push(SortItem { expr, descending });
                if !self.eat_symbol(",") {
                    break;
                }
            }
        }
        let limit = if self.eat_keyword("LIMIT") {
            match self.peek() {
                Some(t) if t.kind == TokenKind::Integer => match t.text.parse::<u64>() {
                    Ok(n) if n >= 1 => {
                        self.pos += 1;
                        Some(n)
                    }
                    _ => return Err(self.error("positive integer limit")),
                },
                _ => return Err(self.error("positive integer limit")),
            }
        } else {
            None
        };
        Ok(Query { matches, where_clause, with, returns, order_by, limit })
    }

    fn pattern_path(&mut self) -> Result<PatternPath, ParseError> {
        let start = self.node_pattern()?;
        let mut steps = Vec::new();
        loop {
            let direction = if self.at_symbol("-") {
                RelDirection::Outgoing
            } else if self.at_symbol("<-") {
                RelDirection::Incoming
            } else {
                break;
            };
            self.pos += 1;
            self.expect_symbol("[")?;
            self.expect_symbol(":")?;
            let kind = self.identifier("relationship type")?;
            self.expect_symbol("]")?;
            match direction {
                RelDirection::Outgoing => self.expect_symbol("->")?,
                RelDirection::Incoming => self.expect_symbol("-")?,
            }
            let node = self.node_pattern()?;
            steps.push(PatternStep { rel: RelPattern { kind, direction }, node });
        }
        Ok(PatternPath { start, steps })
    }

    fn node_pattern(&mut self) -> Result<NodePattern, ParseError> {
        self.expect_symbol("(")?;
        let variable = match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                self.pos += 1;
                Some(t.text.clone())
            }
            _ => None,
        };
        let label = if self.eat_symbol(":") { Some(self.identifier("label")?) } else { None };
        let mut properties = Vec::new();
        if self.eat_symbol("{") {
            loop {
                let key = self.identifier("property name")?;
                self.expect_symbol(":")?;
                properties.push((key, self.literal()?));
                if !self.eat_symbol(",") {
                    break;
                }
            }
            self.expect_symbol("}")?;
        }
        self.expect_symbol(")")?;
        Ok(NodePattern { variable, label, properties })
    }

    fn projections(&mut self, require_alias: bool) -> Result<Vec<Projection>, ParseError> {
        let mut out = Vec::new();
        loop {
            let expr = self.expr()?;
            let alias = if self.eat_keyword("AS") {
                Some(self.identifier("alias")?)
            } else if require_alias && !matches!(expr, Expr::Variable(_)) {
                return Err(self.error("AS"));
            } else {
                None
            };
            out.push(Projection { expr, alias });
            if !self.eat_symbol(",") {
                break;
            }
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.operand()?;
        let op = match self.peek() {
            Some(t) if t.kind == TokenKind::Symbol => CompareOp::from_symbol(&t.text),
            _ => None,
        };
        match op {
            Some(op) => {
                self.pos += 1;
                let rhs = self.operand()?;
                Ok(Expr::compare(op, lhs, rhs))
            }
            None => Ok(lhs),
        }
    }

    fn operand(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek() else {
            return Err(self.error("expression"));
        };
        if tok.is_symbol("(") {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect_symbol(")")?;
            return Ok(inner);
        }
        if tok.kind == TokenKind::Identifier {
            self.pos += 1;
            let mut parts = vec![tok.text.clone()];
            while self.at_symbol(".") && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier) {
                parts.push(self.tokens[self.pos + 1].text.clone());
                self.pos += 2;
            }
            if self.eat_symbol("(") {
                let mut args = Vec::new();
                if !self.eat_symbol(")") {
                    loop {
                        args.push(self.expr()?);
                        if !self.eat_symbol(",") {
                            break;
                        }
                    }
                    self.expect_symbol(")")?;
                }
                return Ok(Expr::Function { name: parts.join("."), args });
            }
            return match parts.len() {
                1 => Ok(Expr::Variable(parts.remove(0))),
                2 => Ok(Expr::Property { variable: parts.remove(0), name: parts.remove(0) }),
                _ => Err(self.error("'(' after function name")),
            };
        }
        self.literal().map(Expr::Literal)
    }

    fn literal(&mut self) -> Result<PropertyValue, ParseError> {
        let Some(tok) = self.peek() else {
            return Err(self.error("literal"));
        };
        if tok.is_keyword("TRUE") || tok.is_keyword("FALSE") || tok.is_keyword("NULL") {
            self.pos += 1;
            return Ok(match tok.text.to_ascii_uppercase().as_str() {
                "TRUE" => PropertyValue::Boolean(true),
                "FALSE" => PropertyValue::Boolean(false),
                _ => PropertyValue::Null,
            });
        }
        if tok.kind == TokenKind::Text {
            let value = unescape(&tok.text).ok_or_else(|| self.error("valid string escape"))?;
            self.pos += 1;
            return Ok(PropertyValue::Text(value));
        }
        if tok.is_symbol("[") {
            self.pos += 1;
            let mut items = Vec::new();
            if !self.eat_symbol("]") {
                loop {
                    match self.number()? {
                        PropertyValue::Integer(i) => items.push(i as f64),
                        PropertyValue::Float(f) => items.push(f),
                        _ => unreachable!("number() yields numbers"),
                    }
                    if !self.eat_symbol(",") {
                        break;
                    }
                }
                self.expect_symbol("]")?;
            }
            return Ok(PropertyValue::FloatVector(items));
        }
        self.number()
    }

    fn number(&mut self) -> Result<PropertyValue, ParseError> {
        let negative = self.eat_symbol("-");
        let Some(tok) = self.peek() else {
            return Err(self.error("literal"));
        };
        let value = match tok.kind {
            TokenKind::Integer => {
                let magnitude: i128 = tok.text.parse().map_err(|_| self.error("integer in 64-bit range"))?;
                let signed = if negative { -magnitude } else { magnitude };
                PropertyValue::Integer(i64::try_from(signed).map_err(|_| self.error("integer in 64-bit range"))?)
            }
            TokenKind::Float => {
                let v: f64 = tok.text.parse().map_err(|_| self.error("float literal"))?;
                if !v.is_finite() {
                    return Err(self.error("finite float literal"));
                }
                PropertyValue::Float(if negative { -v } else { v })
            }
            _ => return Err(self.error("literal")),
        };
        self.pos += 1;
        Ok(value)
    }
}

fn unescape(raw: &str) -> Option<String> {
    let inner = &raw[1..raw.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next()? {
            '\\' => '\\',
            '\'' => '\'',
            '"' => '"',
            'n' => '\n',
            'r' => '\r',
            't' => '\t',
            _ => return None,
        });
    }
    Some(out)
}
