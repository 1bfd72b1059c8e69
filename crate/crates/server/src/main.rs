use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use tracing_subscriber::EnvFilter;

use debugscope_server::config::Config;
use debugscope_server::{open_platform, serve, system_clock};

fn usage() -> ! {
    eprintln!("usage: debugscope-server [--config <file.toml>]");
    std::process::exit(2);
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();

    let mut args = std::env::args().skip(1);
    let mut config_path: Option<PathBuf> = None;
    while let Some(a) = args.next() {
        match a.as_str() {
            "--config" | "-c" => config_path = Some(args.next().unwrap_or_else(|| usage()).into()),
            "--help" | "-h" => usage(),
            _ => usage(),
        }
    }

    let cfg = Config::load(config_path.as_deref())?;
    let platform = open_platform(&cfg, system_clock())
        .with_context(|| format!("opening store at {}", cfg.store.display()))?;
    let handle = serve(
        Arc::new(platform),
        cfg.listen,
        Some(Duration::from_secs(cfg.sweep_interval_secs.max(1))),
    )
    .await?;
    tracing::info!(addr = %handle.addr, store = %cfg.store.display(), "listening");

    tokio::signal::ctrl_c().await?;
    tracing::info!("shutting down");
    handle.shutdown().await?;
    Ok(())
}
