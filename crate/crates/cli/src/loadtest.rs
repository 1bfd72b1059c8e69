//! Paced load against the read-only question listing, with exact
//! success/failure accounting and latency percentiles.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

pub const API_BASE: &str = "/api/v1";

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Server root (`http://host:port`) or the API base under it.
    pub url: String,
    pub token: String,
    pub total: usize,
    /// Window over which the sends are spread; zero sends as fast as
    /// the senders allow.
    pub duration: Duration,
    pub concurrency: usize,
    pub request_timeout: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub target: String,
    pub sent: u64,
    pub succeeded: u64,
    pub failed: u64,
    /// From the first send to the last response.
    pub elapsed_ms: f64,
    /// Offset of the last send from the first.
    pub last_send_ms: f64,
    /// Latency of successful requests; absent when none succeeded.
    pub p50_ms: Option<f64>,
    pub p95_ms: Option<f64>,
    pub p99_ms: Option<f64>,
    pub max_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
}

impl LoadReport {
    /// Nothing got through, so the server was most likely down.
    pub fn unreachable(&self) -> bool {
        self.succeeded == 0 && self.failed > 0
    }
}

pub fn api_base(url: &str) -> String {
    let u = url.trim_end_matches('/');
    if u.ends_with(API_BASE) {
        u.to_string()
    } else {
        format!("{u}{API_BASE}")
    }
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

fn client(timeout: Duration) -> reqwest::Client {
    reqwest::Client::builder()
        .timeout(timeout)
        .build()
        .expect("http client builds")
}

/// Exchanges credentials for a token.
pub async fn login(url: &str, user: &str, secret: &str) -> Result<String> {
    let base = api_base(url);
    let resp = client(Duration::from_secs(10))
        .post(format!("{base}/login"))
        .json(&serde_json::json!({"user_id": user, "secret": secret}))
        .send()
        .await
        .map_err(|e| CliError::ServerUnreachable {
            url: base.clone(),
            message: e.to_string(),
        })?;
    let status = resp.status();
    let body: serde_json::Value = resp.json().await.map_err(|e| CliError::LoginFailed(e.to_string()))?;
    if !status.is_success() {
        return Err(CliError::LoginFailed(body["message"].as_str().unwrap_or("unknown").to_string()));
    }
    body["token"]
        .as_str()
        .map(String::from)
        .ok_or_else(|| CliError::LoginFailed("response carried no token".into()))
}

pub async fn run_load(opts: &LoadOptions) -> LoadReport {
    let target = format!("{}/questions", api_base(&opts.url));
    let http = client(opts.request_timeout);
    let next = Arc::new(AtomicUsize::new(0));
    let sent = Arc::new(AtomicU64::new(0));
    let succeeded = Arc::new(AtomicU64::new(0));
    let failed = Arc::new(AtomicU64::new(0));
    let last_send = Arc::new(AtomicU64::new(0));
    let first_error: Arc<Mutex<Option<String>>> = Arc::default();
    // Leave headroom so scheduling jitter does not push sends past the window.
    let window = opts.duration.mul_f64(0.9);
    let start = tokio::time::Instant::now();
    let wall = Instant::now();

    let mut workers = Vec::new();
    for _ in 0..opts.concurrency.clamp(1, opts.total.max(1)) {
        let (http, target, token) = (http.clone(), target.clone(), opts.token.clone());
        let (next, sent, succeeded, failed) = (next.clone(), sent.clone(), succeeded.clone(), failed.clone());
        let (last_send, first_error) = (last_send.clone(), first_error.clone());
        let total = opts.total;
        workers.push(tokio::spawn(async move {
            let mut latencies = Vec::new();
            loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= total {
                    break;
                }
                tokio::time::sleep_until(start + window.mul_f64(i as f64 / total as f64)).await;
                let t = Instant::now();
                sent.fetch_add(1, Ordering::Relaxed);
                last_send.fetch_max(wall.elapsed().as_micros() as u64, Ordering::Relaxed);
                let outcome = http.get(&target).header("Authorization", &token).send().await;
                let err = match outcome {
                    Ok(r) if r.status().is_success() => match r.bytes().await {
                        Ok(_) => None,
                        Err(e) => Some(e.to_string()),
                    },
                    Ok(r) => Some(format!("HTTP {}", r.status())),
                    Err(e) => Some(e.to_string()),
                };
                match err {
                    None => {
                        succeeded.fetch_add(1, Ordering::Relaxed);
                        latencies.push(t.elapsed().as_secs_f64() * 1000.0);
                    }
                    Some(e) => {
                        failed.fetch_add(1, Ordering::Relaxed);
                        first_error.lock().unwrap().get_or_insert(e);
                    }
                }
            }
            latencies
        }));
    }
    let mut latencies = Vec::new();
    for w in workers {
        latencies.extend(w.await.expect("load worker panicked"));
    }
    let elapsed_ms = wall.elapsed().as_secs_f64() * 1000.0;
    latencies.sort_by(f64::total_cmp);
    let first_error = first_error.lock().unwrap().take();
    LoadReport {
        target,
        sent: sent.load(Ordering::Relaxed),
        succeeded: succeeded.load(Ordering::Relaxed),
        failed: failed.load(Ordering::Relaxed),
        elapsed_ms,
        last_send_ms: last_send.load(Ordering::Relaxed) as f64 / 1000.0,
        p50_ms: percentile(&latencies, 50.0),
        p95_ms: percentile(&latencies, 95.0),
        p99_ms: percentile(&latencies, 99.0),
        max_ms: latencies.last().copied(),
        first_error,
    }
}

pub fn render_text(r: &LoadReport) -> String {
    let ms = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2} ms"));
    let mut s = String::new();
    let _ = writeln!(s, "target     {}", r.target);
    let _ = writeln!(s, "sent       {}", r.sent);
    let _ = writeln!(s, "succeeded  {}", r.succeeded);
    let _ = writeln!(s, "failed     {}", r.failed);
    let _ = writeln!(s, "elapsed    {:.1} ms (last send at {:.1} ms)", r.elapsed_ms, r.last_send_ms);
    let _ = writeln!(s, "p50        {}", ms(r.p50_ms));
    let _ = writeln!(s, "p95        {}", ms(r.p95_ms));
    let _ = writeln!(s, "p99        {}", ms(r.p99_ms));
    let _ = writeln!(s, "max        {}", ms(r.max_ms));
    if let Some(e) = &r.first_error {
        let _ = writeln!(s, "first error: {e}");
    }
    s
}

pub fn render_json(r: &LoadReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes")
}
