//! Run manifest: always written, even when a run fails.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Serialize, Default)]
pub struct CausticCounts {
    pub on_wigner_caustic: usize,
    pub central_flags: usize,
    pub chord_flags: usize,
    pub degenerate_centers: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub threads: usize,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_site: Option<String>,
    pub caustic_counts: CausticCounts,
    pub outputs: Vec<String>,
    pub elapsed_s: f64,
}

impl Manifest {
    pub fn new(command: &str, config_text: &str, threads: usize) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_text.as_bytes());
        Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: format!("{:x}", hasher.finalize()),
            threads,
            status: "ok".to_string(),
            failure_site: None,
            caustic_counts: CausticCounts::default(),
            outputs: Vec::new(),
            elapsed_s: 0.0,
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join("manifest.json"), text + "\n")
    }
}
