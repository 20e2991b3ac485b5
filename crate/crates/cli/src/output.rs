// SPDX-License-Identifier: Apache-2.0

//! Tables, provenance manifests and file writing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub fn write_file(path: &Path, contents: &str) -> Result<PathBuf, CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}

/// Comma-separated table preceded by `#` comment lines.
pub fn table(comments: &[String], header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "{}", header.join(","));
    for r in rows {
        let _ = writeln!(out, "{}", r.join(","));
    }
    out
}

/// Full-precision float cell; round-trips through `str::parse`.
pub fn cell(v: f64) -> String {
    format!("{v:?}")
}

/// SHA-256 of the canonical serialized configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    Sha256::digest(cfg.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub workers: usize,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
    pub config: ExperimentConfig,
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(command: &str, cfg: &ExperimentConfig, workers: usize, started: DateTime<Utc>, outputs: &[PathBuf]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config_hash: config_hash(cfg),
            seed: cfg.acquisition.seed,
            workers,
            started: stamp(started),
            finished: stamp(Utc::now()),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            config: cfg.clone(),
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf, CliError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(&out_dir.join(format!("manifest_{}.json", self.command.replace('-', "_"))), &(json + "\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_tracks_config_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
        b.acquisition.seed += 1;
        assert_ne!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn cells_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17] {
            assert_eq!(cell(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn table_layout() {
        let t = table(&["note".into()], &["a", "b"], &[vec!["1".into(), "2".into()]]);
        assert_eq!(t, "# note\na,b\n1,2\n");
    }
}
