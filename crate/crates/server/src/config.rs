use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub listen: SocketAddr,
    pub store: PathBuf,
    pub session_timeout_secs: u64,
    /// How often the background sweeper looks for idle sessions.
    pub sweep_interval_secs: u64,
    /// Member-chain roots counted as platform API calls.
    pub api_prefixes: Vec<String>,
    /// fsync after every store write.
    pub durable: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen: "127.0.0.1:8080".parse().expect("literal address"),
            store: PathBuf::from("debugscope-data"),
            session_timeout_secs: 30 * 60,
            sweep_interval_secs: 30,
            api_prefixes: vec!["wx".to_string()],
            durable: true,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("environment variable {var}: {message}")]
    Env { var: &'static str, message: String },
}

pub const ENV_LISTEN: &str = "DEBUGSCOPE_LISTEN";
pub const ENV_STORE: &str = "DEBUGSCOPE_STORE";
pub const ENV_TIMEOUT: &str = "DEBUGSCOPE_SESSION_TIMEOUT_SECS";
pub const ENV_PREFIXES: &str = "DEBUGSCOPE_API_PREFIXES";

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads the optional file, then applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Config, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                Config::from_toml(&text).map_err(|source| ConfigError::Parse {
                    path: p.to_path_buf(),
                    source,
                })?
            }
            None => Config::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = get(ENV_LISTEN) {
            self.listen = v.parse().map_err(|e: std::net::AddrParseError| ConfigError::Env {
                var: ENV_LISTEN,
                message: e.to_string(),
            })?;
        }
        if let Some(v) = get(ENV_STORE) {
            self.store = PathBuf::from(v);
        }
        if let Some(v) = get(ENV_TIMEOUT) {
            self.session_timeout_secs = v.parse().map_err(|e: std::num::ParseIntError| ConfigError::Env {
                var: ENV_TIMEOUT,
                message: e.to_string(),
            })?;
        }
        if let Some(v) = get(ENV_PREFIXES) {
            self.api_prefixes = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_env() {
        let mut cfg = Config::from_toml(
            "listen = \"0.0.0.0:9000\"\nstore = \"/var/lib/ds\"\nsession_timeout_secs = 60\n",
        )
        .unwrap();
        assert_eq!(cfg.api_prefixes, ["wx"]);
        assert_eq!(cfg.session_timeout_secs, 60);
        cfg.apply_env(|k| match k {
            ENV_TIMEOUT => Some("90".into()),
            ENV_PREFIXES => Some("wx, my ,".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(cfg.session_timeout_secs, 90);
        assert_eq!(cfg.api_prefixes, ["wx", "my"]);
        assert_eq!(cfg.listen.port(), 9000);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_env() {
        assert!(Config::from_toml("listen_addr = \"x\"").is_err());
        let mut cfg = Config::default();
        assert!(cfg.apply_env(|k| (k == ENV_LISTEN).then(|| "nope".into())).is_err());
    }
}
