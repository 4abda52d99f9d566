use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use svreg_core::study::ReplicationFailure;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written once into every output directory.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub version: String,
    pub rng: String,
    pub timestamp: String,
    /// Replications excluded from the aggregates.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<ReplicationFailure>,
}

pub fn digest(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seeds: Vec<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            config,
            seeds,
            inputs: Vec::new(),
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: svreg_core::simgen::RNG_ALGORITHM.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            failures: Vec::new(),
        }
    }

    pub fn add_inputs<'a>(&mut self, paths: impl IntoIterator<Item = &'a PathBuf>) -> std::io::Result<()> {
        for p in paths {
            self.inputs.push(FileDigest {
                path: p.display().to_string(),
                sha256: digest(p)?,
            });
        }
        Ok(())
    }
}
