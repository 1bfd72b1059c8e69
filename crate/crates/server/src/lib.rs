//! Debugging-session capture service: token login, session lifecycle with
//! timeout and resume, event and snapshot ingestion, question bank, help
//! tickets and leaderboards, served as JSON over HTTP.

pub mod config;
pub mod http;
pub mod platform;
pub mod wire;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use debugscope_core::store::{Store, StoreOptions};

use crate::config::Config;
use crate::platform::{Clock, Platform, PlatformOptions, SystemClock};

/// Opens the store named by `cfg` and loads the platform state from it.
pub fn open_platform(cfg: &Config, clock: Arc<dyn Clock>) -> Result<Platform, platform::PlatformError> {
    let store = Store::open_with(&cfg.store, StoreOptions { durable: cfg.durable })?;
    Platform::open(
        store,
        clock,
        PlatformOptions {
            session_timeout_secs: cfg.session_timeout_secs,
            api_prefixes: cfg.api_prefixes.clone(),
        },
    )
}

/// A running server. Dropping the handle does not stop it; call `shutdown`.
pub struct ServerHandle {
    pub addr: SocketAddr,
    pub platform: Arc<Platform>,
    shutdown: tokio::sync::oneshot::Sender<()>,
    task: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl ServerHandle {
    pub fn base_url(&self) -> String {
        format!("http://{}{}", self.addr, http::API_BASE)
    }

    pub async fn shutdown(self) -> std::io::Result<()> {
        let _ = self.shutdown.send(());
        self.task.await.expect("server task panicked")
    }
}

/// Binds `addr` and serves the API, sweeping idle sessions every
/// `sweep_interval` when one is given.
pub async fn serve(
    platform: Arc<Platform>,
    addr: SocketAddr,
    sweep_interval: Option<Duration>,
) -> std::io::Result<ServerHandle> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let addr = listener.local_addr()?;
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let app = http::router(platform.clone());

    let sweeper = sweep_interval.map(|every| {
        let p = platform.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(every);
            tick.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
            loop {
                tick.tick().await;
                let p = p.clone();
                match tokio::task::spawn_blocking(move || p.sweep_timeouts()).await {
                    Ok(Ok(ids)) if !ids.is_empty() => tracing::info!(count = ids.len(), "sessions timed out"),
                    Ok(Err(e)) => tracing::error!(error = %e, "timeout sweep failed"),
                    _ => {}
                }
            }
        })
    });

    let task = tokio::spawn(async move {
        let r = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await;
        if let Some(s) = sweeper {
            s.abort();
        }
        r
    });
    Ok(ServerHandle {
        addr,
        platform,
        shutdown: tx,
        task,
    })
}

/// Convenience for callers that only need the system clock.
pub fn system_clock() -> Arc<dyn Clock> {
    Arc::new(SystemClock)
}
