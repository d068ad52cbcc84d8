use serde::{Deserialize, Serialize};
use sqrtwiener::clifford::PauliPair;
use sqrtwiener::ARTIFACT_VERSION;

use crate::config::RunConfig;

/// An output file and the SHA-256 of its bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started: String,
    pub finished: String,
}

/// Everything needed to reproduce and verify a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub config: RunConfig,
    /// Worker threads used; never affects any emitted number.
    pub threads: usize,
    /// Pauli indices of the Clifford embedding.
    pub pauli_pair: (u8, u8),
    /// SHA-256 of the square-root increments, when the run simulated them.
    pub increment_digest: Option<String>,
    /// SHA-256 of the Wiener increments, when the run sampled them.
    pub wiener_digest: Option<String>,
    pub files: Vec<OutputFile>,
    pub timestamps: Timestamps,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        let (i, k) = PauliPair::default().indices();
        Self {
            artifact_version: ARTIFACT_VERSION.to_string(),
            command: command.to_string(),
            config: config.clone(),
            threads: rayon::current_num_threads(),
            pauli_pair: (i.index(), k.index()),
            increment_digest: None,
            wiener_digest: None,
            files: Vec::new(),
            timestamps: Timestamps {
                started: now(),
                finished: String::new(),
            },
        }
    }

    pub fn finish(&mut self) {
        self.timestamps.finished = now();
    }

    /// File name of the manifest for `command`.
    pub fn file_name(command: &str) -> String {
        format!("manifest_{command}.json")
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
