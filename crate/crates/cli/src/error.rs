use std::path::PathBuf;

use debugscope_core::behavior::{AnalysisError, ClusterError};
use debugscope_core::jsparse::bench::BenchError;
use debugscope_core::store::StoreError;
use debugscope_core::{SessionId, SessionState};

/// Every failure the CLI reports. Each variant has a fixed exit code; see
/// [`CliError::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read store at {path}: {source}")]
    StoreUnreadable { path: PathBuf, source: StoreError },
    #[error("store write failed: {0}")]
    StoreWrite(StoreError),
    #[error("session {0} not found")]
    SessionNotFound(SessionId),
    #[error("session {id} is {state:?}; reports need an Ended session")]
    SessionNotEnded { id: SessionId, state: SessionState },
    #[error("{0}")]
    Cluster(#[from] ClusterError),
    #[error("{0}")]
    Bench(#[from] BenchError),
    #[error("server unreachable at {url}: {message}")]
    ServerUnreachable { url: String, message: String },
    #[error("login rejected: {0}")]
    LoginFailed(String),
    #[error("analysis failed: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// | code | meaning |
    /// |------|---------|
    /// | 0 | success |
    /// | 1 | I/O failure writing output, or analysis failure |
    /// | 2 | bad arguments |
    /// | 3 | store missing or unreadable |
    /// | 4 | session not found |
    /// | 5 | session not ended |
    /// | 6 | clustering impossible (k too large or zero) |
    /// | 7 | benchmark corpus empty or unparseable |
    /// | 8 | server unreachable |
    /// | 9 | store write failed |
    /// | 10 | server rejected the login |
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Analysis(_) => 1,
            CliError::Usage(_) => 2,
            CliError::StoreUnreadable { .. } => 3,
            CliError::SessionNotFound(_) => 4,
            CliError::SessionNotEnded { .. } => 5,
            CliError::Cluster(_) => 6,
            CliError::Bench(_) => 7,
            CliError::ServerUnreachable { .. } => 8,
            CliError::StoreWrite(_) => 9,
            CliError::LoginFailed(_) => 10,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
