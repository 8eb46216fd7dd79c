//! Command-line and HTTP front end for the knowledge-graph chat engine.

pub mod args;
pub mod commands;
pub mod server;
