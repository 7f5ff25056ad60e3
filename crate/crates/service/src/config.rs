use std::net::SocketAddr;
use std::path::PathBuf;

pub const ENV_ADDR: &str = "FLIMREG_ADDR";
pub const ENV_DATA: &str = "FLIMREG_DATA";
pub const ENV_WORKERS: &str = "FLIMREG_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub data_dir: PathBuf,
    pub workers: usize,
}

/// One core is left for request handling.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get().saturating_sub(1).max(1))
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { addr: SocketAddr::from(([127, 0, 0, 1], 8080)), data_dir: PathBuf::from("flimreg-data"), workers: default_workers() }
    }
}

impl ServiceConfig {
    /// Defaults overridden by `FLIMREG_ADDR`, `FLIMREG_DATA` and `FLIMREG_WORKERS`.
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let mut cfg = Self::default();
        if let Some(a) = get(ENV_ADDR) {
            cfg.addr = a.parse().map_err(|e| format!("{ENV_ADDR}=`{a}`: {e}"))?;
        }
        if let Some(d) = get(ENV_DATA) {
            cfg.data_dir = d.into();
        }
        if let Some(w) = get(ENV_WORKERS) {
            cfg.workers = match w.parse::<usize>() {
                Ok(n) if n > 0 => n,
                _ => return Err(format!("{ENV_WORKERS}=`{w}`: expected a positive integer")),
            };
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_overrides() {
        let cfg = ServiceConfig::from_lookup(|k| match k {
            ENV_ADDR => Some("0.0.0.0:9000".into()),
            ENV_WORKERS => Some("3".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(cfg.addr.port(), 9000);
        assert_eq!(cfg.workers, 3);
        assert_eq!(cfg.data_dir, PathBuf::from("flimreg-data"));
        assert!(ServiceConfig::from_lookup(|k| (k == ENV_WORKERS).then(|| "0".into())).is_err());
        assert!(ServiceConfig::from_lookup(|k| (k == ENV_ADDR).then(|| "nope".into())).is_err());
    }
}
