//! Test-side oracles. Nothing here calls the library code it is used to
//! check: cosine is exact big-integer arithmetic, the query evaluator is a
//! brute-force interpreter over the parsed tree, and the ingest helpers are
//! written from the recipe rather than from the implementation.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use kgchat_core::cypher::ast::{CompareOp, Expr, NodePattern, Query, RelDirection};
use kgchat_core::cypher::Execution;
use kgchat_core::graph::{Graph, Label, PropertyValue};
use num_bigint::{BigInt, Sign};
use num_traits::{Float, ToPrimitive, Zero};
use regex::Regex;

pub const FIXTURE_ARTICLES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/articles.jsonl");
pub const FIXTURE_POLICY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/policy.json");
pub const BUNDLED_LEXICON: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/lexicon.tsv");

pub const SCORE_TOLERANCE: f64 = 1e-9;

// ---------------------------------------------------------------- cosine

/// `x` as an integer multiple of 2^-1075.
fn exact(x: f64) -> BigInt {
    let (mantissa, exponent, sign) = x.integer_decode();
    let shift = i32::from(exponent) + 1075;
    let magnitude = BigInt::from(mantissa) << usize::try_from(shift).expect("finite input");
    if sign < 0 {
        -magnitude
    } else {
        magnitude
    }
}

/// Cosine similarity evaluated with exact integer arithmetic and a 120-bit
/// fixed-point square root. Zero vectors give 0.
pub fn exact_cosine(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (mut dot, mut na, mut nb) = (BigInt::zero(), BigInt::zero(), BigInt::zero());
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (exact(*x), exact(*y));
        dot += &x * &y;
        na += &x * &x;
        nb += &y * &y;
    }
    if na.is_zero() || nb.is_zero() {
        return 0.0;
    }
    const BITS: usize = 120;
    let negative = dot.sign() == Sign::Minus;
    let ratio = (&dot * &dot << (2 * BITS)) / (na * nb);
    let root = ratio.sqrt();
    let value = root.to_f64().expect("fits") / 2f64.powi(BITS as i32);
    let value = value.min(1.0);
    if negative {
        -value
    } else {
        value
    }
}

// ---------------------------------------------------------------- ingest

pub fn oracle_tokens(text: &str) -> Vec<String> {
    let word = Regex::new("[a-z0-9]+").unwrap();
    word.find_iter(&text.to_lowercase()).map(|m| m.as_str().to_string()).collect()
}

pub fn oracle_lexicon(text: &str) -> HashMap<String, f64> {
    let mut out = HashMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let word = parts.next().unwrap().trim().to_lowercase();
        let valence: f64 = parts.next().unwrap().trim().parse().unwrap();
        out.insert(word, valence);
    }
    out
}

pub fn bundled_lexicon() -> HashMap<String, f64> {
    oracle_lexicon(&std::fs::read_to_string(BUNDLED_LEXICON).unwrap())
}

const NEGATORS: &str = "not no never none nobody nothing neither nor nowhere cannot without nope rarely seldom despite \
     isn aren wasn weren doesn didn don hasn haven hadn couldn shouldn wouldn mustn shan ain \
     isnt arent wasnt werent doesnt didnt dont hasnt havent hadnt couldnt shouldnt wouldnt cant wont aint";

/// Lexicon sum with a -0.74 damping for words within three tokens after a
/// negator, normalized as s / sqrt(s^2 + 15).
pub fn oracle_compound(tokens: &[String], lexicon: &HashMap<String, f64>) -> f64 {
    let negators: Vec<&str> = NEGATORS.split_whitespace().collect();
    let mut sum = 0.0;
    for i in 0..tokens.len() {
        let Some(&v) = lexicon.get(&tokens[i]) else { continue };
        let start = i.saturating_sub(3);
        let negated = (start..i).any(|j| negators.contains(&tokens[j].as_str()));
        sum += if negated { -0.74 * v } else { v };
    }
    sum / (sum * sum + 15.0).sqrt()
}

pub fn oracle_label(compound: f64) -> &'static str {
    if compound >= 0.05 {
        "positive"
    } else if compound <= -0.05 {
        "negative"
    } else {
        "neutral"
    }
}

fn oracle_fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 14_695_981_039_346_656_037;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(1_099_511_628_211);
    }
    h
}

/// Signed feature hashing of each token and the character 3/4/5-grams of
/// `<token>`, then L2 normalization.
pub fn oracle_embedding(tokens: &[String], dimension: usize) -> Vec<f64> {
    let mut counts = vec![0i64; dimension];
    for token in tokens {
        let chars: Vec<char> = std::iter::once('<').chain(token.chars()).chain(std::iter::once('>')).collect();
        let mut features = vec![token.clone()];
        for n in 3..=5 {
            for start in 0..chars.len().saturating_sub(n - 1) {
                features.push(chars[start..start + n].iter().collect());
            }
        }
        for f in features {
            let h = oracle_fnv(f.as_bytes());
            let sign = if h & (1 << 63) == 0 { 1 } else { -1 };
            counts[(h % dimension as u64) as usize] += sign;
        }
    }
    let squares: i64 = counts.iter().map(|c| c * c).sum();
    if squares == 0 {
        return vec![0.0; dimension];
    }
    let norm = (squares as f64).sqrt();
    counts.iter().map(|&c| c as f64 / norm).collect()
}

/// Fixture records parsed straight from JSON.
pub fn fixture_records() -> Vec<serde_json::Value> {
    std::fs::read_to_string(FIXTURE_ARTICLES)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

// ---------------------------------------------------------------- query evaluator

#[derive(Clone, Debug, PartialEq)]
enum OVal {
    Node(usize),
    Scalar(PropertyValue),
}

type OEnv = Vec<(String, OVal)>;

/// One result row with the values it sorts by.
#[derive(Clone, Debug)]
pub struct OracleRow {
    pub cells: Vec<PropertyValue>,
    pub keys: Vec<PropertyValue>,
    pub descending: Vec<bool>,
    pub tie: Vec<(u8, i64)>,
}

fn label_rank(label: Label) -> u8 {
    match label {
        Label::Article => 0,
        Label::Topic => 1,
    }
}

fn lookup<'e>(env: &'e OEnv, name: &str) -> Result<&'e OVal, String> {
    env.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v).ok_or_else(|| format!("unbound {name}"))
}

fn o_eval(expr: &Expr, env: &OEnv, graph: &Graph) -> Result<OVal, String> {
    Ok(match expr {
        Expr::Literal(v) => OVal::Scalar(v.clone()),
        Expr::Variable(name) => lookup(env, name)?.clone(),
        Expr::Property { variable, name } => match lookup(env, variable)? {
            OVal::Node(i) => OVal::Scalar(graph.nodes()[*i].properties.get(name).cloned().unwrap_or(PropertyValue::Null)),
            OVal::Scalar(PropertyValue::Null) => OVal::Scalar(PropertyValue::Null),
            OVal::Scalar(_) => return Err(format!("{variable} is not a node")),
        },
        Expr::Compare { op, lhs, rhs } => {
            let l = o_eval(lhs, env, graph)?;
            let r = o_eval(rhs, env, graph)?;
            OVal::Scalar(PropertyValue::Boolean(o_compare(*op, &l, &r)))
        }
        Expr::Function { name, args } => {
            assert!(name.eq_ignore_ascii_case("gds.similarity.cosine"), "unexpected function {name}");
            let a = o_eval(&args[0], env, graph)?;
            let b = o_eval(&args[1], env, graph)?;
            match (a, b) {
                (OVal::Scalar(PropertyValue::FloatVector(x)), OVal::Scalar(PropertyValue::FloatVector(y))) => {
                    if x.len() != y.len() {
                        return Err("dimension mismatch".into());
                    }
                    OVal::Scalar(PropertyValue::Float(exact_cosine(&x, &y)))
                }
                (OVal::Scalar(PropertyValue::Null), _) | (_, OVal::Scalar(PropertyValue::Null)) => {
                    OVal::Scalar(PropertyValue::Null)
                }
                _ => return Err("cosine of non-vectors".into()),
            }
        }
    })
}

fn numeric(v: &PropertyValue) -> Option<f64> {
    match v {
        PropertyValue::Integer(i) => Some(*i as f64),
        PropertyValue::Float(f) => Some(*f),
        _ => None,
    }
}

/// Null on either side is false; values of different kinds are unequal
/// and unordered.
fn o_compare(op: CompareOp, l: &OVal, r: &OVal) -> bool {
    use PropertyValue as P;
    if matches!(l, OVal::Scalar(P::Null)) || matches!(r, OVal::Scalar(P::Null)) {
        return false;
    }
    let ord: Option<Ordering> = match (l, r) {
        (OVal::Node(a), OVal::Node(b)) => {
            if a == b {
                Some(Ordering::Equal)
            } else {
                return op == CompareOp::Ne;
            }
        }
        (OVal::Scalar(P::Integer(a)), OVal::Scalar(P::Integer(b))) => Some(a.cmp(b)),
        (OVal::Scalar(a), OVal::Scalar(b)) if numeric(a).is_some() && numeric(b).is_some() => {
            numeric(a).unwrap().partial_cmp(&numeric(b).unwrap())
        }
        (OVal::Scalar(P::Text(a)), OVal::Scalar(P::Text(b))) => Some(a.cmp(b)),
        (OVal::Scalar(P::Boolean(a)), OVal::Scalar(P::Boolean(b))) => Some(a.cmp(b)),
        (OVal::Scalar(P::FloatVector(a)), OVal::Scalar(P::FloatVector(b))) => {
            let same = a == b;
            return match op {
                CompareOp::Eq => same,
                CompareOp::Ne => !same,
                _ => false,
            };
        }
        _ => None,
    };
    match ord {
        None => op == CompareOp::Ne,
        Some(o) => match op {
            CompareOp::Eq => o.is_eq(),
            CompareOp::Ne => o.is_ne(),
            CompareOp::Lt => o.is_lt(),
            CompareOp::Gt => o.is_gt(),
            CompareOp::Le => o.is_le(),
            CompareOp::Ge => o.is_ge(),
        },
    }
}

fn o_true(cond: Option<&Expr>, env: &OEnv, graph: &Graph) -> Result<bool, String> {
    match cond {
        None => Ok(true),
        Some(e) => Ok(o_eval(e, env, graph)? == OVal::Scalar(PropertyValue::Boolean(true))),
    }
}

fn node_fits(graph: &Graph, index: usize, pattern: &NodePattern) -> bool {
    let node = &graph.nodes()[index];
    if let Some(label) = &pattern.label {
        if node.label.as_str() != label {
            return false;
        }
    }
    pattern.properties.iter().all(|(k, v)| {
        let actual = node.properties.get(k).cloned().unwrap_or(PropertyValue::Null);
        o_compare(CompareOp::Eq, &OVal::Scalar(actual), &OVal::Scalar(v.clone()))
    })
}

fn column_name(p: &kgchat_core::cypher::ast::Projection) -> String {
    p.alias.clone().unwrap_or_else(|| p.expr.to_string())
}

/// Total order for sort keys: text, booleans, numbers, vectors, null last.
pub fn key_order(a: &PropertyValue, b: &PropertyValue) -> Ordering {
    use PropertyValue as P;
    fn rank(v: &PropertyValue) -> u8 {
        match v {
            P::Text(_) => 1,
            P::Boolean(_) => 2,
            P::Integer(_) | P::Float(_) => 3,
            P::FloatVector(_) => 4,
            P::Null => 5,
        }
    }
    match (a, b) {
        (P::Text(x), P::Text(y)) => x.cmp(y),
        (P::Boolean(x), P::Boolean(y)) => x.cmp(y),
        (P::Integer(x), P::Integer(y)) => x.cmp(y),
        _ if numeric(a).is_some() && numeric(b).is_some() => numeric(a).unwrap().total_cmp(&numeric(b).unwrap()),
        _ => rank(a).cmp(&rank(b)),
    }
}

/// Evaluates `query` by trying every assignment of graph nodes to pattern
/// variables, then sorts by ORDER BY keys and the keys of the bound nodes.
/// Returns every row; the caller applies the limit.
pub fn naive_evaluate(query: &Query, graph: &Graph) -> Result<Vec<OracleRow>, String> {
    // pattern positions: each variable is one slot, each anonymous node its own slot
    let mut slot_names: Vec<Option<String>> = Vec::new();
    let mut node_checks: Vec<(usize, NodePattern)> = Vec::new();
    let mut edges: Vec<(usize, usize, String)> = Vec::new();
    let slot_of = |pattern: &NodePattern, names: &mut Vec<Option<String>>| -> usize {
        if let Some(v) = &pattern.variable {
            if let Some(i) = names.iter().position(|n| n.as_deref() == Some(v.as_str())) {
                return i;
            }
        }
        names.push(pattern.variable.clone());
        names.len() - 1
    };
    for path in &query.matches {
        let mut prev = slot_of(&path.start, &mut slot_names);
        node_checks.push((prev, path.start.clone()));
        for step in &path.steps {
            let next = slot_of(&step.node, &mut slot_names);
            node_checks.push((next, step.node.clone()));
            match step.rel.direction {
                RelDirection::Outgoing => edges.push((prev, next, step.rel.kind.clone())),
                RelDirection::Incoming => edges.push((next, prev, step.rel.kind.clone())),
            }
            prev = next;
        }
    }
    let index_of: HashMap<u64, usize> = graph.nodes().iter().enumerate().map(|(i, n)| (n.id.0, i)).collect();
    let edge_set: Vec<(usize, usize, String)> =
        graph.edges().iter().map(|e| (index_of[&e.source.0], index_of[&e.target.0], e.kind.clone())).collect();

    let n = graph.nodes().len();
    let k = slot_names.len();
    let mut assignment = vec![0usize; k];
    let mut bound: Vec<Vec<usize>> = Vec::new();
    let total = n.checked_pow(k as u32).expect("small graphs only");
    for mut code in 0..total {
        for slot in assignment.iter_mut() {
            *slot = code % n;
            code /= n;
        }
        let ok = node_checks.iter().all(|(slot, p)| node_fits(graph, assignment[*slot], p))
            && edges.iter().all(|(s, t, kind)| {
                edge_set.iter().any(|(a, b, k)| *a == assignment[*s] && *b == assignment[*t] && k == kind)
            });
        if ok {
            bound.push(assignment.clone());
        }
    }

    let mut rows = Vec::new();
    for nodes in bound {
        let mut env: OEnv = slot_names
            .iter()
            .zip(&nodes)
            .filter_map(|(name, &i)| name.clone().map(|n| (n, OVal::Node(i))))
            .collect();
        if !o_true(query.where_clause.as_ref(), &env, graph)? {
            continue;
        }
        let mut keep = true;
        for with in &query.with {
            let mut next = OEnv::new();
            for p in &with.projections {
                next.push((column_name(p), o_eval(&p.expr, &env, graph)?));
            }
            env = next;
            if !o_true(with.where_clause.as_ref(), &env, graph)? {
                keep = false;
                break;
            }
        }
        if !keep {
            continue;
        }
        let mut cells = Vec::new();
        let mut sort_env = env.clone();
        for p in &query.returns {
            match o_eval(&p.expr, &env, graph)? {
                OVal::Scalar(v) => {
                    sort_env.push((column_name(p), OVal::Scalar(v.clone())));
                    cells.push(v);
                }
                OVal::Node(_) => return Err("node in result".into()),
            }
        }
        let mut keys = Vec::new();
        for item in &query.order_by {
            match o_eval(&item.expr, &sort_env, graph)? {
                OVal::Scalar(v) => keys.push(v),
                OVal::Node(i) => keys.push(PropertyValue::Integer(graph.nodes()[i].id.0 as i64)),
            }
        }
        let tie = nodes
            .iter()
            .map(|&i| {
                let node = &graph.nodes()[i];
                let key = node.properties[node.label.key_property()].as_integer().unwrap();
                (label_rank(node.label), key)
            })
            .collect();
        rows.push(OracleRow { cells, keys, descending: query.order_by.iter().map(|o| o.descending).collect(), tie });
    }
    rows.sort_by(|a, b| {
        for ((x, y), desc) in a.keys.iter().zip(&b.keys).zip(&a.descending) {
            let o = key_order(x, y);
            let o = if *desc { o.reverse() } else { o };
            if o.is_ne() {
                return o;
            }
        }
        a.tie.cmp(&b.tie)
    });
    Ok(rows)
}

pub fn cells_close(a: &PropertyValue, b: &PropertyValue) -> bool {
    use PropertyValue as P;
    match (a, b) {
        (P::Float(x), P::Float(y)) => (x - y).abs() <= SCORE_TOLERANCE,
        (P::FloatVector(x), P::FloatVector(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| (p - q).abs() <= SCORE_TOLERANCE)
        }
        _ => a == b,
    }
}

fn rows_close(a: &[PropertyValue], b: &[PropertyValue]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| cells_close(x, y))
}

fn keys_close(a: &OracleRow, b: &OracleRow) -> bool {
    a.keys.iter().zip(&b.keys).all(|(x, y)| match (numeric(x), numeric(y)) {
        (Some(p), Some(q)) => (p - q).abs() <= SCORE_TOLERANCE,
        _ => x == y,
    })
}

/// Checks engine output against sorted oracle rows truncated at `limit`.
///
/// Rows whose sort keys agree within the score tolerance form a group. A
/// group keyed only by exact values must appear in tie-break order; a group
/// with float keys may appear in any order, since the engine's floating
/// point and the exact oracle can disagree in the last bits.
pub fn compare_with_oracle(execution: &Execution, oracle: &[OracleRow], limit: usize) -> Result<(), String> {
    let engine = &execution.table.rows;
    let expected_len = oracle.len().min(limit);
    if engine.len() != expected_len {
        return Err(format!("engine returned {} rows, oracle expects {expected_len}", engine.len()));
    }
    if execution.matched_rows != oracle.len() {
        return Err(format!("engine matched {} rows, oracle {}", execution.matched_rows, oracle.len()));
    }
    let mut start = 0;
    while start < expected_len {
        let mut end = start + 1;
        while end < oracle.len() && keys_close(&oracle[start], &oracle[end]) {
            end += 1;
        }
        let group = &oracle[start..end];
        let taken = &engine[start..end.min(expected_len)];
        let exact_keys = group.iter().all(|r| r.keys.iter().all(|k| !matches!(k, PropertyValue::Float(_))));
        if exact_keys {
            for (i, (o, e)) in group.iter().zip(taken).enumerate() {
                if !rows_close(&o.cells, e) {
                    return Err(format!("row {}: engine {:?}, oracle {:?}", start + i, e, o.cells));
                }
            }
        } else {
            let mut used = vec![false; group.len()];
            for e in taken {
                let hit = group.iter().enumerate().find(|(i, o)| !used[*i] && rows_close(&o.cells, e));
                match hit {
                    Some((i, _)) => used[i] = true,
                    None => return Err(format!("engine row {e:?} has no match in oracle group at {start}")),
                }
            }
        }
        start = end;
    }
    Ok(())
}

/// Brute-force similar articles: every other article scored with the exact
/// cosine, sorted by score descending then article id ascending.
pub fn brute_force_top_k(graph: &Graph, article_id: i64, k: usize) -> Vec<(i64, f64)> {
    let articles: BTreeMap<i64, &[f64]> = graph
        .nodes()
        .iter()
        .filter(|n| n.label == Label::Article)
        .map(|n| (n.properties["article_id"].as_integer().unwrap(), n.properties["content_vector"].as_vector().unwrap()))
        .collect();
    let query = articles[&article_id];
    let mut scored: Vec<(i64, f64)> =
        articles.iter().filter(|(id, _)| **id != article_id).map(|(id, v)| (*id, exact_cosine(query, v))).collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

// ---------------------------------------------------------------- random graphs and queries

pub mod random {
    use kgchat_core::cypher::{check_text, execute, CvlPolicy};
    use kgchat_core::graph::{Graph, NodeId, Properties, PropertyValue, HAS_TOPIC};
    use rand::rngs::StdRng;
    use rand::seq::{index, IndexedRandom};
    use rand::{Rng, SeedableRng};

    const TITLES: &[&str] = &["alpha", "beta", "gamma", "delta"];
    const SENTIMENTS: &[&str] = &["positive", "negative", "neutral"];
    const TOPIC_NAMES: &[&str] = &["Robotics", "Ethics", "NLP", "Vision", "Ethics"];
    pub const DIMENSION: usize = 4;

    /// A graph with at most 30 nodes and 60 edges. Vectors hold small
    /// integers and compounds are quarters, so ties are common.
    pub fn graph(rng: &mut StdRng) -> Graph {
        let total = rng.random_range(1..=30);
        let topics = rng.random_range(0..=total.min(8) - 1);
        let articles = total - topics;
        let mut g = Graph::new(DIMENSION);
        let mut article_nodes = Vec::new();
        for key in index::sample(rng, 60, articles) {
            let mut p = Properties::new();
            p.insert("article_id".into(), PropertyValue::Integer(key as i64 + 1));
            p.insert("title".into(), (*TITLES.choose(rng).unwrap()).into());
            p.insert("content".into(), "x".into());
            p.insert("sentiment".into(), (*SENTIMENTS.choose(rng).unwrap()).into());
            p.insert("compound".into(), (f64::from(rng.random_range(-4..=4)) / 4.0).into());
            let vector: Vec<f64> = (0..DIMENSION).map(|_| f64::from(rng.random_range(-2..=2))).collect();
            p.insert("content_vector".into(), vector.into());
            p.insert("published_date".into(), "2023-01-01".into());
            p.insert("publisher".into(), "P".into());
            p.insert("country".into(), "C".into());
            article_nodes.push(g.create_node("Article", p).unwrap());
        }
        let mut topic_nodes: Vec<NodeId> = Vec::new();
        for key in index::sample(rng, 20, topics) {
            let mut p = Properties::new();
            p.insert("topic_id".into(), PropertyValue::Integer(key as i64 + 1));
            p.insert("name".into(), (*TOPIC_NAMES.choose(rng).unwrap()).into());
            topic_nodes.push(g.create_node("Topic", p).unwrap());
        }
        if !topic_nodes.is_empty() {
            for _ in 0..rng.random_range(0..=60) {
                let a = *article_nodes.choose(rng).unwrap();
                let t = *topic_nodes.choose(rng).unwrap();
                let _ = g.create_edge(a, t, HAS_TOPIC);
            }
        }
        assert!(g.node_count() <= 30 && g.edge_count() <= 60);
        g
    }

    fn article_key(g: &Graph, rng: &mut StdRng) -> i64 {
        let keys: Vec<i64> = g.label_iter(kgchat_core::graph::Label::Article).map(|n| n.key()).collect();
        if rng.random_bool(0.85) {
            *keys.choose(rng).unwrap()
        } else {
            99
        }
    }

    fn article_condition(var: &str, rng: &mut StdRng) -> String {
        let options = [
            format!("WHERE {var}.compound > 0.25"),
            format!("WHERE {var}.compound >= 0"),
            format!("WHERE {var}.sentiment = 'positive'"),
            format!("WHERE {var}.article_id <= {}", rng.random_range(1..=60)),
            format!("WHERE {var}.title <> 'beta'"),
            format!("WHERE {var}.title < 'c'"),
            format!("WHERE {var}.article_id = 'seven'"),
            String::new(),
        ];
        options.choose(rng).unwrap().clone()
    }

    /// One query of each supported shape, with random parameters.
    pub fn queries(g: &Graph, rng: &mut StdRng) -> Vec<String> {
        let thresholds = ["-0.2718", "0.3141", "0.7182", "0.1234"];
        let mut out = Vec::new();
        let order = *["", "ORDER BY a.compound DESC, a.title", "ORDER BY a.article_id"].choose(rng).unwrap();
        out.push(format!("MATCH (a:Article) {} RETURN a.article_id, a.sentiment, a.compound {order}", article_condition("a", rng)));
        let order = *["", "ORDER BY t.name, a.article_id DESC"].choose(rng).unwrap();
        out.push(format!(
            "MATCH (a:Article)-[:HAS_TOPIC]->(t:Topic) {} RETURN a.article_id, t.name {order}",
            article_condition("a", rng)
        ));
        out.push(format!(
            "MATCH (t:Topic)<-[:HAS_TOPIC]-(a:Article) WHERE t.topic_id >= {} RETURN t.topic_id AS tid, a.title ORDER BY tid DESC",
            rng.random_range(1..=20)
        ));
        let filter = if rng.random_bool(0.5) {
            format!("WHERE s > {}", thresholds.choose(rng).unwrap())
        } else {
            String::new()
        };
        let limit = if rng.random_bool(0.5) { format!("LIMIT {}", rng.random_range(1..=10)) } else { String::new() };
        out.push(format!(
            "MATCH (a1:Article {{article_id: {}}}), (a2:Article) WHERE a1 <> a2 \
             WITH a1, a2, gds.similarity.cosine(a1.content_vector, a2.content_vector) AS s {filter} \
             RETURN a2.article_id, s ORDER BY s DESC {limit}",
            article_key(g, rng)
        ));
        out.push(
            "MATCH (a1:Article)-[:HAS_TOPIC]->(t:Topic)<-[:HAS_TOPIC]-(a2:Article) \
             WHERE a1.article_id < a2.article_id RETURN a1.article_id, a2.article_id, t.topic_id"
                .to_string(),
        );
        out.push(if rng.random_bool(0.5) {
            format!("MATCH (n) WHERE n.article_id >= {} RETURN n.article_id, n.title", rng.random_range(1..=60))
        } else {
            format!("MATCH (n {{topic_id: {}}}) RETURN n.name", rng.random_range(1..=20))
        });
        out.push(format!(
            "MATCH (a:Article), (t:Topic) WHERE a.compound > {} RETURN a.article_id, t.topic_id ORDER BY a.article_id LIMIT {}",
            ["-0.5", "0", "0.5"].choose(rng).unwrap(),
            rng.random_range(1..=12)
        ));
        out.push(
            "MATCH (a:Article)-[:HAS_TOPIC]->(t:Topic) WITH a, t.name AS topic WHERE topic <> 'Ethics' \
             RETURN a.article_id, topic, a.compound ORDER BY topic, a.compound DESC"
                .to_string(),
        );
        out
    }

    /// Runs every generated query on `graphs` seeded graphs through the
    /// engine and the naive evaluator. Returns the number of queries
    /// compared.
    pub fn check_equivalence(seed: u64, graphs: usize) -> Result<usize, String> {
        let mut rng = StdRng::seed_from_u64(seed);
        let policy = CvlPolicy::default();
        let mut compared = 0;
        for round in 0..graphs {
            let g = graph(&mut rng);
            for text in queries(&g, &mut rng) {
                let checked = check_text(&text, &policy);
                if !checked.report.is_accepted() {
                    return Err(format!("graph {round}: validation rejected {text}: {:?}", checked.report.codes()));
                }
                let query = checked.query.unwrap();
                let limit = checked.report.effective_limit;
                let execution = execute(&query, &g, limit).map_err(|e| format!("graph {round}: {text}: {e}"))?;
                let oracle = super::naive_evaluate(&query, &g).map_err(|e| format!("graph {round}: {text}: {e}"))?;
                super::compare_with_oracle(&execution, &oracle, limit as usize)
                    .map_err(|e| format!("graph {round}: {text}: {e}"))?;
                compared += 1;
            }
        }
        Ok(compared)
    }
}

/// Queries the validation layer must reject.
pub const HOSTILE_QUERIES: &[&str] = &[
    "CREATE (n:Article {article_id: 1}) RETURN n.article_id",
    "MATCH (n:Article) SET n.sentiment = 'positive' RETURN n.sentiment",
    "MATCH (n:Article) DELETE n",
    "MATCH (n:Article) DETACH DELETE n",
    "MERGE (t:Topic {topic_id: 9}) RETURN t.name",
    "MATCH (n:Article) REMOVE n.title RETURN n.article_id",
    "DROP INDEX article_index",
    "CREATE INDEX FOR (n:Article) ON (n.article_id)",
    "CALL db.labels()",
    "LOAD CSV FROM 'file:///etc/passwd' AS line RETURN line",
    "MATCH (n:Article) RETURN n.article_id LIMIT 1; MATCH (m) DETACH DELETE m",
    "MATCH (u:User) RETURN u.name LIMIT 5",
    "MATCH (a:Article)-[:CITES]->(b:Article) RETURN b.article_id LIMIT 5",
    "MATCH (a:Article) RETURN a.password LIMIT 5",
    "MATCH (t:Topic) RETURN t.content LIMIT 5",
    "MATCH (a:Article) RETURN apoc.load.json(a.title) LIMIT 5",
    "MATCH (a:Article), (b:Article) RETURN gds.similarity.euclidean(a.content_vector, b.content_vector) LIMIT 5",
    "MATCH (a:Article) RETURN a.article_id LIMIT 100000",
    "MATCH (a:Article) RETURN a.article_id LIMIT 101",
    "MATCH (a:Article) RETURN a LIMIT 5",
    "MATCH (a:Article) RETURN b.article_id LIMIT 5",
    "MATCH (a:Article RETURN a.article_id",
    "MATCH (a:Article) WHERE a.title = 'unterminated RETURN a.title",
    "RETURN 1",
];
