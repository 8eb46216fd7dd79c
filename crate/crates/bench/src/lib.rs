//! Inputs shared by the benchmarks.

use std::fs::File;
use std::io::BufReader;

use kgchat_core::graph::Graph;
use kgchat_core::ingest::{build_graph, read_jsonl, Lexicon, RawArticle};
use kgchat_core::llm::MockBackend;
use kgchat_core::orchestrator::{Orchestrator, OrchestratorConfig};
use kgchat_core::rbac::Policy;

pub const FIXTURE_ARTICLES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/articles.jsonl");

pub fn fixture_articles() -> Vec<RawArticle> {
    read_jsonl(BufReader::new(File::open(FIXTURE_ARTICLES).expect("fixture articles"))).expect("valid fixture")
}

pub fn fixture_graph() -> Graph {
    build_graph(&fixture_articles(), 64, &Lexicon::bundled()).expect("fixture graph")
}

pub fn fixture_orchestrator() -> Orchestrator {
    Orchestrator::new(fixture_graph(), Policy::default(), Box::new(MockBackend), OrchestratorConfig::default())
}
