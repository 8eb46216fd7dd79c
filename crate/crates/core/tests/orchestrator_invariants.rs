mod common;

use std::fs::File;
use std::io::BufReader;

use common::*;
use kgchat_core::capabilities::{find_similar, get_sentiment, predict_topic, CapabilityRun};
use kgchat_core::cypher::{run_text, CvlPolicy};
use kgchat_core::graph::Graph;
use kgchat_core::ingest::{build_graph, read_jsonl, Lexicon};
use kgchat_core::llm::MockBackend;
use kgchat_core::orchestrator::{ChatResponse, ChatTurn, Orchestrator, OrchestratorConfig};
use kgchat_core::rbac::{AccessVerdict, CapabilityKind, Policy};

fn fixture_graph() -> Graph {
    let articles = read_jsonl(BufReader::new(File::open(FIXTURE_ARTICLES).unwrap())).unwrap();
    build_graph(&articles, 64, &Lexicon::bundled()).unwrap()
}

fn fixture_policy() -> Policy {
    Policy::from_json(&std::fs::read_to_string(FIXTURE_POLICY).unwrap()).unwrap()
}

fn orchestrator() -> Orchestrator {
    Orchestrator::new(fixture_graph(), fixture_policy(), Box::new(MockBackend), OrchestratorConfig::default())
}

const USERS: [(&str, &str); 3] = [("admin", "t-admin-1"), ("analyst", "t-analyst-1"), ("guest", "t-guest-1")];

/// Messages routed to each capability.
fn messages(kind: CapabilityKind) -> &'static [&'static str] {
    match kind {
        CapabilityKind::GenericResponse => &["Hello, what can you do?", "Tell me about newsroom ethics"],
        CapabilityKind::Summarize => &["Summarize article 101", "Summarize: Markets rose. Then they fell. Nobody knew why."],
        CapabilityKind::SimilarArticles => &["Which articles are similar to article 100?", "similar to article 149"],
        CapabilityKind::SentimentLookup => &["What is the sentiment of article 100?", "sentiment of article 120"],
        CapabilityKind::TopicPrediction => &["Predict the topic of article 100", "predict topic of article 120"],
        CapabilityKind::FactCheck => &["Fact-check the claim in article 120"],
        CapabilityKind::IndustryPrediction => &["Which industries will article 130 affect?"],
        CapabilityKind::RawCypher => &[
            "cypher: MATCH (a:Article) WHERE a.compound > 0.5 RETURN a.article_id, a.compound ORDER BY a.compound DESC",
            "cypher: MATCH (a:Article)-[:HAS_TOPIC]->(t:Topic) RETURN a.article_id, t.name LIMIT 7",
            "cypher: MATCH (n) RETURN n.title",
        ],
    }
}

/// The documented grant table for the fixture policy.
fn granted(role: &str, kind: CapabilityKind) -> bool {
    use CapabilityKind::*;
    match role {
        "admin" => true,
        "analyst" => matches!(kind, GenericResponse | Summarize | SimilarArticles | SentimentLookup | TopicPrediction),
        "guest" => matches!(kind, GenericResponse | Summarize),
        _ => false,
    }
}

/// Summarizing a stored article also reads the graph, so it needs the
/// Article label, which guest lacks.
fn turn_granted(role: &str, kind: CapabilityKind, message: &str) -> bool {
    let stored_article = kind == CapabilityKind::Summarize && message.contains("article");
    granted(role, kind) && !(stored_article && role == "guest")
}

fn ask(o: &Orchestrator, token: &str, message: &str) -> ChatResponse {
    o.handle_turn(&ChatTurn::new("matrix", message), token).unwrap()
}

fn replay(o: &Orchestrator, role: &str, response: &ChatResponse) {
    let Some(text) = &response.explanation.cypher_text else { return };
    let role = o.policy().role(role).unwrap();
    let policy = CvlPolicy::default().restrict_labels(role.labels.iter().map(String::as_str));
    let run = run_text(text, o.graph(), &policy);
    assert_eq!(response.explanation.validation.as_ref(), Some(&run.report), "{text}");
    match (&response.explanation.rows, run.execution) {
        (Some(rows), Some(Ok(execution))) => assert_eq!(rows, &execution.table, "{text}"),
        (None, None) => {}
        (rows, execution) => panic!("{text}: {rows:?} vs {execution:?}"),
    }
}

#[test]
fn every_role_capability_cell_matches_the_table_and_deny_leaks_nothing() {
    let o = orchestrator();
    let mut cells = 0;
    let mut turns = 0;
    for (role, token) in USERS {
        for kind in CapabilityKind::ALL {
            for message in messages(kind) {
                let r = ask(&o, token, message);
                turns += 1;
                assert_eq!(r.explanation.capability.kind(), kind, "{message}");
                let grant = r.explanation.rbac.verdict == AccessVerdict::Grant;
                assert_eq!(grant, turn_granted(role, kind, message), "{role} {message}");
                if grant {
                    replay(&o, role, &r);
                } else {
                    assert!(r.explanation.cypher_text.is_none(), "{role} {message}");
                    assert!(r.explanation.rows.is_none(), "{role} {message}");
                    assert!(r.explanation.validation.is_none(), "{role} {message}");
                    assert!(r.reply.starts_with("Access denied"), "{}", r.reply);
                }
            }
            cells += 1;
        }
    }
    assert_eq!(cells, 24);
    assert_eq!(o.audit_len(), turns);
}

#[test]
fn responses_are_deterministic_apart_from_turn_id() {
    let (a, b) = (orchestrator(), orchestrator());
    for (_, token) in USERS {
        for kind in CapabilityKind::ALL {
            for message in messages(kind) {
                let (x, y) = (ask(&a, token, message), ask(&b, token, message));
                assert_ne!(x.turn_id, y.turn_id);
                assert_eq!(serde_json::to_string(&x.explanation).unwrap(), serde_json::to_string(&y.explanation).unwrap());
                assert_eq!(x.reply, y.reply);
            }
        }
    }
}

#[test]
fn audit_log_has_one_line_per_turn() {
    let dir = tempfile::tempdir().unwrap();
    let audit = dir.path().join("audit.jsonl");
    let o = orchestrator().with_logs(Some(&audit), None).unwrap();
    for (i, (_, token)) in USERS.iter().cycle().take(10).enumerate() {
        ask(&o, token, messages(CapabilityKind::ALL[i % 8])[0]);
    }
    assert!(o.handle_turn(&ChatTurn::new("s", "hello"), "bogus").is_err());
    o.flush_logs().unwrap();
    assert_eq!(std::fs::read_to_string(&audit).unwrap().lines().count(), 10);
}

fn replays(graph: &Graph, run: &CapabilityRun) {
    let again = run_text(&run.cypher_text, graph, &CvlPolicy::default());
    assert_eq!(again.report, run.validation);
    assert_eq!(again.execution.unwrap().unwrap().table, run.rows, "{}", run.cypher_text);
}

#[test]
fn capability_runs_replay_through_the_public_path() {
    let g = fixture_graph();
    for id in [100, 120, 133, 149] {
        for k in [1, 5, 49] {
            replays(&g, &find_similar(&g, id, k).unwrap().1);
        }
        replays(&g, &get_sentiment(&g, id).unwrap().1);
        for threshold in [-1.0, 0.5, 0.97] {
            let (prediction, run) = predict_topic(&g, id, threshold).unwrap();
            replays(&g, &run);
            if let Some(p) = prediction {
                assert!(p.score > threshold);
                let via = g.find_article(p.via_article).unwrap().id;
                assert!(g.edges().iter().any(|e| e.source == via
                    && g.get_node(e.target).unwrap().properties["name"].as_text() == Some(p.topic_name.as_str())));
            }
        }
    }
}
