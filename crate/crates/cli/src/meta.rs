//! JSON sidecar written next to every output file.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub command: &'a str,
    pub output: String,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub config: &'a Value,
    pub seeds: &'a Value,
    pub workers: usize,
    pub version: &'static str,
    pub created_unix: u64,
}

pub fn config_hash(config: &Value) -> String {
    // serde_json maps are ordered by key, so this string is canonical.
    hex::encode(Sha256::digest(config.to_string().as_bytes()))
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    output.with_file_name(name)
}

/// Context shared by all outputs of one invocation.
pub struct Recorder {
    pub command: &'static str,
    pub config: Value,
    pub seeds: Value,
    pub workers: usize,
}

impl Recorder {
    pub fn record(&self, output: &Path) -> anyhow::Result<()> {
        let meta = Metadata {
            command: self.command,
            output: output.display().to_string(),
            config_hash: config_hash(&self.config),
            config: &self.config,
            seeds: &self.seeds,
            workers: self.workers,
            version: env!("CARGO_PKG_VERSION"),
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        };
        let mut s = serde_json::to_string_pretty(&meta)?;
        s.push('\n');
        std::fs::write(sidecar_path(output), s)?;
        Ok(())
    }
}
