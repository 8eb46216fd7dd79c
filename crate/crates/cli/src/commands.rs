//! One-shot commands. Each writes results to `out`, diagnostics to `err`,
//! and returns the process exit code.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{Context, Result};
use kgchat_core::capabilities::{
    find_similar, get_sentiment, no_prediction_message, predict_topic, CapabilityError, CapabilityRun,
};
use kgchat_core::cypher::{run_text, CvlPolicy, ResultTable, ViolationCode};
use kgchat_core::graph::{load_snapshot, save_snapshot, Graph};
use kgchat_core::ingest::{build_graph, read_jsonl, IngestSummary, Lexicon};
use kgchat_core::llm::render_value;
use kgchat_core::rbac::{load_policy, CapabilityKind};

use crate::args::{IngestArgs, QueryArgs, SentimentArgs, SimilarArgs, TopicArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;

fn fail(err: &mut dyn Write, error: &anyhow::Error) -> i32 {
    let _ = writeln!(err, "error: {error:#}");
    EXIT_FAILURE
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    load_snapshot(path).with_context(|| format!("loading snapshot {}", path.display()))
}

pub fn ingest(args: &IngestArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run_ingest(args) {
        Ok(summary) => {
            let _ = writeln!(out, "{summary}");
            EXIT_OK
        }
        Err(e) => fail(err, &e),
    }
}

fn run_ingest(args: &IngestArgs) -> Result<IngestSummary> {
    let lexicon = match &args.lexicon {
        Some(path) => Lexicon::load(path).with_context(|| format!("loading lexicon {}", path.display()))?,
        None => Lexicon::bundled(),
    };
    let file = File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let articles = read_jsonl(BufReader::new(file)).with_context(|| format!("reading {}", args.input.display()))?;
    let graph = build_graph(&articles, args.dimension, &lexicon)?;
    save_snapshot(&graph, &args.snapshot).with_context(|| format!("writing snapshot {}", args.snapshot.display()))?;
    Ok(IngestSummary::of(&graph))
}

/// Renders a result table as left-aligned columns under a dashed rule.
pub fn format_table(table: &ResultTable) -> String {
    let cells: Vec<Vec<String>> = table.rows.iter().map(|r| r.iter().map(render_value).collect()).collect();
    let widths: Vec<usize> = table
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].chars().count()).chain([c.chars().count()]).max().unwrap_or(0))
        .collect();
    let line = |values: &[String]| {
        let padded: Vec<String> = values.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = String::new();
    out.push_str(&line(&table.columns));
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("  "));
    out.push('\n');
    for row in &cells {
        out.push_str(&line(row));
        out.push('\n');
    }
    let n = table.rows.len();
    out.push_str(&format!("({n} row{})\n", if n == 1 { "" } else { "s" }));
    out
}

/// Exit 0 when accepted and executed, 2 when validation or access control
/// rejects the query, 1 when it cannot be read, parsed or evaluated.
pub fn query(args: &QueryArgs, policy_path: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let graph = match load_graph(&args.snapshot) {
        Ok(g) => g,
        Err(e) => return fail(err, &e),
    };
    let policy = match load_policy(policy_path) {
        Ok(p) => p,
        Err(e) => return fail(err, &anyhow::Error::new(e).context("loading policy")),
    };
    let Some(role) = policy.role(&args.role) else {
        return fail(err, &anyhow::anyhow!("unknown role {:?}", args.role));
    };
    if !role.capabilities.contains(&CapabilityKind::RawCypher) {
        let _ = writeln!(err, "access denied: role {} does not grant {}", role.name, CapabilityKind::RawCypher);
        return EXIT_REJECTED;
    }
    let cvl = CvlPolicy::default()
        .with_max_limit(args.max_limit)
        .restrict_labels(role.labels.iter().map(String::as_str));
    let run = run_text(&args.cypher, &graph, &cvl);
    match run.execution {
        None => {
            let _ = writeln!(out, "rejected by the validation layer:");
            for v in &run.report.violations {
                let _ = writeln!(out, "  {}: {}", v.code, v.message);
            }
            let unreadable =
                run.report.codes().iter().any(|c| matches!(c, ViolationCode::LexError | ViolationCode::ParseError));
            if unreadable {
                EXIT_FAILURE
            } else {
                EXIT_REJECTED
            }
        }
        Some(Err(e)) => fail(err, &anyhow::Error::new(e).context("evaluating query")),
        Some(Ok(execution)) => {
            if run.report.limit_injected {
                let _ = writeln!(err, "note: no LIMIT given; {} applied", run.report.effective_limit);
            }
            let _ = write!(out, "{}", format_table(&execution.table));
            EXIT_OK
        }
    }
}

fn explain(out: &mut dyn Write, enabled: bool, run: &CapabilityRun) {
    if enabled {
        let _ = writeln!(out, "cypher:\n{}\n", run.cypher_text);
    }
}

fn capability_failure(err: &mut dyn Write, error: CapabilityError) -> i32 {
    match error {
        CapabilityError::UnknownArticle(id) => {
            let _ = writeln!(err, "error: article {id} not found");
            EXIT_FAILURE
        }
        other => fail(err, &anyhow::Error::new(other)),
    }
}

pub fn similar(args: &SimilarArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let graph = match load_graph(&args.snapshot) {
        Ok(g) => g,
        Err(e) => return fail(err, &e),
    };
    match find_similar(&graph, args.id, args.k) {
        Ok((articles, run)) => {
            explain(out, args.explain, &run);
            for a in articles {
                let _ = writeln!(out, "{}\t{:.6}", a.article_id, a.score);
            }
            EXIT_OK
        }
        Err(e) => capability_failure(err, e),
    }
}

pub fn sentiment(args: &SentimentArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let graph = match load_graph(&args.snapshot) {
        Ok(g) => g,
        Err(e) => return fail(err, &e),
    };
    match get_sentiment(&graph, args.id) {
        Ok((score, run)) => {
            explain(out, args.explain, &run);
            let _ = writeln!(out, "article {}: {} (compound {:.4})", args.id, score.label, score.compound);
            EXIT_OK
        }
        Err(e) => capability_failure(err, e),
    }
}

pub fn topic(args: &TopicArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let graph = match load_graph(&args.snapshot) {
        Ok(g) => g,
        Err(e) => return fail(err, &e),
    };
    match predict_topic(&graph, args.id, args.threshold) {
        Ok((Some(p), run)) => {
            explain(out, args.explain, &run);
            let _ = writeln!(
                out,
                "article {}: {} (via article {}, similarity {:.6})",
                args.id, p.topic_name, p.via_article, p.score
            );
            EXIT_OK
        }
        Ok((None, run)) => {
            explain(out, args.explain, &run);
            let best = match find_similar(&graph, args.id, 1) {
                Ok((best, _)) => best.first().map(|a| a.score),
                Err(e) => return capability_failure(err, e),
            };
            let _ = writeln!(out, "{}", no_prediction_message(best, args.threshold));
            EXIT_OK
        }
        Err(e) => capability_failure(err, e),
    }
}
