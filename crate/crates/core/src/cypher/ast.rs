//! Query tree for the supported Cypher subset. `Display` on [`Query`] is the
//! canonical single-line unparser; its output parses back to an equal tree.

use std::fmt::{self, Write};

use crate::graph::PropertyValue;

#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub matches: Vec<PatternPath>,
    pub where_clause: Option<Expr>,
    pub with: Vec<WithClause>,
    pub returns: Vec<Projection>,
    pub order_by: Vec<SortItem>,
    pub limit: Option<u64>,
}

/// `(a)-[:KIND]->(b)<-[:KIND]-(c)...`
#[derive(Clone, Debug, PartialEq)]
pub struct PatternPath {
    pub start: NodePattern,
    pub steps: Vec<PatternStep>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternStep {
    pub rel: RelPattern,
    pub node: NodePattern,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodePattern {
    pub variable: Option<String>,
    pub label: Option<String>,
    pub properties: Vec<(String, PropertyValue)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelDirection {
    /// `-[:K]->`, from the left node to the right node.
    Outgoing,
    /// `<-[:K]-`, from the right node to the left node.
    Incoming,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelPattern {
    pub kind: String,
    pub direction: RelDirection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WithClause {
    pub projections: Vec<Projection>,
    pub where_clause: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub expr: Expr,
    pub alias: Option<String>,
}

impl Projection {
    /// Output column name: the alias, or the canonical text of the expression.
    pub fn column_name(&self) -> String {
        match &self.alias {
            Some(alias) => alias.clone(),
            None => self.expr.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SortItem {
    pub expr: Expr,
    pub descending: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "<>",
            CompareOp::Lt => "<",
            CompareOp::Gt => ">",
            CompareOp::Le => "<=",
            CompareOp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "=" => CompareOp::Eq,
            "<>" => CompareOp::Ne,
            "<" => CompareOp::Lt,
            ">" => CompareOp::Gt,
            "<=" => CompareOp::Le,
            ">=" => CompareOp::Ge,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Property { variable: String, name: String },
    Literal(PropertyValue),
    Compare { op: CompareOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Function { name: String, args: Vec<Expr> },
    Variable(String),
}

impl Expr {
    pub fn compare(op: CompareOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Compare { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn property(variable: &str, name: &str) -> Self {
        Expr::Property { variable: variable.to_string(), name: name.to_string() }
    }

    /// Calls `f` on this expression and every sub-expression, pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Compare { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Function { args, .. } => args.iter().for_each(|a| a.walk(f)),
            _ => {}
        }
    }
}

impl Query {
    /// Every literal in the query, including pattern property maps.
    pub fn literals(&self) -> Vec<&PropertyValue> {
        let mut out = Vec::new();
        for node in self.node_patterns() {
            out.extend(node.properties.iter().map(|(_, v)| v));
        }
        for expr in self.expressions() {
            expr.walk(&mut |e| {
                if let Expr::Literal(v) = e {
                    out.push(v);
                }
            });
        }
        out
    }

    pub fn node_patterns(&self) -> impl Iterator<Item = &NodePattern> {
        self.matches
            .iter()
            .flat_map(|p| std::iter::once(&p.start).chain(p.steps.iter().map(|s| &s.node)))
    }

    /// Top-level expressions of every clause, in clause order.
    pub fn expressions(&self) -> Vec<&Expr> {
        let mut out: Vec<&Expr> = self.where_clause.iter().collect();
        for w in &self.with {
            out.extend(w.projections.iter().map(|p| &p.expr));
            out.extend(w.where_clause.iter());
        }
        out.extend(self.returns.iter().map(|p| &p.expr));
        out.extend(self.order_by.iter().map(|s| &s.expr));
        out
    }
}

pub(crate) fn write_literal(out: &mut impl Write, value: &PropertyValue) -> fmt::Result {
    match value {
        PropertyValue::Integer(v) => write!(out, "{v}"),
        PropertyValue::Float(v) => write!(out, "{v:?}"),
        PropertyValue::Text(s) => {
            out.write_char('\'')?;
            for c in s.chars() {
                match c {
                    '\'' => out.write_str("\\'")?,
                    '\\' => out.write_str("\\\\")?,
                    '\n' => out.write_str("\\n")?,
                    '\r' => out.write_str("\\r")?,
                    '\t' => out.write_str("\\t")?,
                    c => out.write_char(c)?,
                }
            }
            out.write_char('\'')
        }
        PropertyValue::FloatVector(v) => {
            out.write_char('[')?;
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                write!(out, "{x:?}")?;
            }
            out.write_char(']')
        }
        PropertyValue::Boolean(b) => out.write_str(if *b { "true" } else { "false" }),
        PropertyValue::Null => out.write_str("null"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Property { variable, name } => write!(f, "{variable}.{name}"),
            Expr::Literal(v) => write_literal(f, v),
            Expr::Compare { op, lhs, rhs } => {
                let side = |f: &mut fmt::Formatter<'_>, e: &Expr| match e {
                    Expr::Compare { .. } => write!(f, "({e})"),
                    _ => write!(f, "{e}"),
                };
                side(f, lhs)?;
                write!(f, " {} ", op.symbol())?;
                side(f, rhs)
            }
            Expr::Function { name, args } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_char(')')
            }
            Expr::Variable(v) => f.write_str(v),
        }
    }
}

impl fmt::Display for NodePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('(')?;
        if let Some(v) = &self.variable {
            f.write_str(v)?;
        }
        if let Some(l) = &self.label {
            write!(f, ":{l}")?;
        }
        if !self.properties.is_empty() {
            if self.variable.is_some() || self.label.is_some() {
                f.write_char(' ')?;
            }
            f.write_char('{')?;
            for (i, (k, v)) in self.properties.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{k}: ")?;
                write_literal(f, v)?;
            }
            f.write_char('}')?;
        }
        f.write_char(')')
    }
}

impl fmt::Display for PatternPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for step in &self.steps {
            match step.rel.direction {
                RelDirection::Outgoing => write!(f, "-[:{}]->", step.rel.kind)?,
                RelDirection::Incoming => write!(f, "<-[:{}]-", step.rel.kind)?,
            }
            write!(f, "{}", step.node)?;
        }
        Ok(())
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)?;
        if let Some(alias) = &self.alias {
            write!(f, " AS {alias}")?;
        }
        Ok(())
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MATCH ")?;
        write_list(f, &self.matches)?;
        if let Some(w) = &self.where_clause {
            write!(f, " WHERE {w}")?;
        }
        for with in &self.with {
            f.write_str(" WITH ")?;
            write_list(f, &with.projections)?;
            if let Some(w) = &with.where_clause {
                write!(f, " WHERE {w}")?;
            }
        }
        f.write_str(" RETURN ")?;
        write_list(f, &self.returns)?;
        if !self.order_by.is_empty() {
            f.write_str(" ORDER BY ")?;
            for (i, item) in self.order_by.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", item.expr)?;
                if item.descending {
                    f.write_str(" DESC")?;
                }
            }
        }
        if let Some(limit) = self.limit {
            write!(f, " LIMIT {limit}")?;
        }
        Ok(())
    }
}
