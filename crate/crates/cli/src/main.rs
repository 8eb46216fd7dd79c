use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::Parser;
use kgchat_cli::args::{resolve_policy_path, Cli, Command, ServeArgs, POLICY_ENV};
use kgchat_cli::commands;
use kgchat_cli::server::{build_orchestrator, serve, ServiceConfig};
use kgchat_core::llm::BackendConfig;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());
    let code = match cli.command {
        Command::Ingest(args) => commands::ingest(&args, &mut out, &mut err),
        Command::Query(args) => {
            let policy = resolve_policy_path(args.policy.clone(), std::env::var_os(POLICY_ENV));
            commands::query(&args, policy.as_deref(), &mut out, &mut err)
        }
        Command::Similar(args) => commands::similar(&args, &mut out, &mut err),
        Command::Sentiment(args) => commands::sentiment(&args, &mut out, &mut err),
        Command::Topic(args) => commands::topic(&args, &mut out, &mut err),
        Command::Serve(args) => match run_server(args) {
            Ok(()) => commands::EXIT_OK,
            Err(e) => {
                eprintln!("error: {e:#}");
                commands::EXIT_FAILURE
            }
        },
    };
    ExitCode::from(code as u8)
}

fn run_server(args: ServeArgs) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let config = ServiceConfig {
        port: args.port,
        host: args.host,
        policy_path: resolve_policy_path(args.policy, std::env::var_os(POLICY_ENV)),
        snapshot_path: args.snapshot,
        backend: BackendConfig::from_env()?,
        max_limit: args.max_limit,
        dimension: args.dimension,
        audit_log: args.audit_log,
        feedback_log: args.feedback_log,
    };
    let orchestrator = Arc::new(build_orchestrator(&config)?);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let address = format!("{}:{}", config.host, config.port);
        let listener = tokio::net::TcpListener::bind(&address).await.with_context(|| format!("binding {address}"))?;
        tracing::info!(
            %address,
            articles = orchestrator.graph().node_count(),
            backend = config.backend.mode.as_str(),
            "serving"
        );
        serve(listener, orchestrator, shutdown_signal()).await?;
        tracing::info!("stopped; logs flushed");
        Ok(())
    })
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        () = ctrl_c => {},
        () = terminate => {},
    }
}
