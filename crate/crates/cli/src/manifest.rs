//! Run manifests: every output directory gets exactly one, recording the
//! command, its effective configuration, the seed and the input digest.
//! Runs that agree on everything but `duration_ms` produce byte-identical
//! result files.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config: serde_json::Value,
    /// sha256 of the input CSV, or of the canonical settings for commands
    /// without a file input.
    pub input_digest: String,
    pub outputs: Vec<String>,
    pub duration_ms: u128,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(71);
    out.push_str("sha256:");
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

pub fn write(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let path = dir.join(MANIFEST_NAME);
    let json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(&path, json + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
