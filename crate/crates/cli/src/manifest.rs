use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Partial,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    pub wall_s: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// sha256 of the scenario (or tabulated-parameter) file.
    pub scenario_hash: Option<String>,
    pub stages: Vec<StageRecord>,
    pub outputs: Vec<OutputRecord>,
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

impl RunManifest {
    /// Existing manifest in `dir`, so separate commands accumulate.
    pub fn open(dir: &Path) -> Self {
        let loaded = std::fs::read_to_string(dir.join(MANIFEST_FILE))
            .ok()
            .and_then(|t| serde_json::from_str::<RunManifest>(&t).ok());
        let mut m = loaded.unwrap_or_default();
        m.tool_version = env!("CARGO_PKG_VERSION").to_string();
        m
    }

    pub fn stage(&mut self, rec: StageRecord) {
        self.stages.retain(|s| s.name != rec.name);
        self.stages.push(rec);
    }

    /// Records `file` (relative to `dir`) with its digest.
    pub fn output(&mut self, dir: &Path, file: &str) -> std::io::Result<String> {
        let digest = sha256_file(&dir.join(file))?;
        self.outputs.retain(|o| o.file != file);
        self.outputs.push(OutputRecord {
            file: file.to_string(),
            sha256: digest.clone(),
        });
        self.outputs.sort_by(|a, b| a.file.cmp(&b.file));
        Ok(digest)
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }
}
