//! Command-line arguments.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use kgchat_core::capabilities::{DEFAULT_K, DEFAULT_THRESHOLD};
use kgchat_core::cypher::DEFAULT_MAX_LIMIT;
use kgchat_core::ingest::DEFAULT_DIMENSION;

pub const POLICY_ENV: &str = "KGCHAT_POLICY";

#[derive(Debug, Parser)]
#[command(name = "kgchat", version, about = "Knowledge-graph chat service over a news-article graph")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a graph snapshot from a JSON Lines article feed.
    Ingest(IngestArgs),
    /// Validate and run a Cypher query as a role.
    Query(QueryArgs),
    /// Articles most similar to one article.
    Similar(SimilarArgs),
    /// Stored sentiment of one article.
    Sentiment(SentimentArgs),
    /// Topic predicted for one article from its nearest neighbour.
    Topic(TopicArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DIMENSION)]
    pub dimension: usize,
    /// Sentiment lexicon (term<TAB>valence); the bundled one by default.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub cypher: String,
    #[arg(long, default_value = "admin")]
    pub role: String,
    /// Policy file; KGCHAT_POLICY takes precedence.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_LIMIT)]
    pub max_limit: u64,
}

#[derive(Debug, Args)]
pub struct SimilarArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub id: i64,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: u64,
    /// Also print the executed Cypher.
    #[arg(long)]
    pub explain: bool,
}

#[derive(Debug, Args)]
pub struct SentimentArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub id: i64,
    #[arg(long)]
    pub explain: bool,
}

#[derive(Debug, Args)]
pub struct TopicArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub id: i64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD, allow_negative_numbers = true)]
    pub threshold: f64,
    #[arg(long)]
    pub explain: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080, value_parser = clap::value_parser!(u16).range(1..))]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long)]
    pub snapshot: PathBuf,
    /// Policy file; KGCHAT_POLICY takes precedence.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_LIMIT)]
    pub max_limit: u64,
    /// Expected embedding dimension of the snapshot.
    #[arg(long)]
    pub dimension: Option<usize>,
    /// JSON Lines file receiving one record per chat turn.
    #[arg(long)]
    pub audit_log: Option<PathBuf>,
    /// JSON Lines file receiving feedback records.
    #[arg(long)]
    pub feedback_log: Option<PathBuf>,
}

/// The policy file to load: the environment variable wins over the flag.
pub fn resolve_policy_path(flag: Option<PathBuf>, env: Option<OsString>) -> Option<PathBuf> {
    env.filter(|v| !v.is_empty()).map(PathBuf::from).or(flag)
}
