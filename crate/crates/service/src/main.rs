use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Parser;

use sandbox_core::ProviderSpec;
use sandbox_service::{router, AppState};

/// Serve a filter-configuration sandbox over HTTP.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Directory holding posts, configuration and collections.
    #[arg(long, env = "SANDBOX_DATA_DIR", default_value = "./sandbox-data")]
    data_dir: PathBuf,
    #[arg(long, env = "SANDBOX_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "SANDBOX_BIND", default_value = "127.0.0.1")]
    bind: std::net::IpAddr,
    /// `tfidf` or `file:<path>` (JSONL sidecar of precomputed vectors).
    #[arg(long, env = "SANDBOX_EMBEDDING_PROVIDER", default_value = "tfidf")]
    embedding_provider: String,
}

#[tokio::main]
async fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    if let Err(e) = run(args).await {
        log::error!("{e}");
        std::process::exit(1);
    }
}

async fn run(args: Args) -> Result<(), Box<dyn std::error::Error>> {
    let provider = ProviderSpec::parse(&args.embedding_provider)
        .ok_or_else(|| format!("unknown embedding provider `{}` (expected tfidf or file:<path>)", args.embedding_provider))?;
    let state = AppState::open(&args.data_dir, provider)?;
    let addr = SocketAddr::new(args.bind, args.port);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("serving {} on http://{addr}", args.data_dir.display());
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
