use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::kernel::KernelMatrixSpec;
use crate::rng::SeedRecord;
use crate::Result;

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seed of one Monte Carlo replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSeed {
    pub label: String,
    pub horizon: Option<f64>,
    pub path: usize,
    pub seed: SeedRecord,
}

/// Summary statistics of one group of paths, keyed by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub horizon: Option<f64>,
    pub paths: usize,
    pub stats: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub library_version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub model: KernelMatrixSpec,
    pub seeds: Vec<PathSeed>,
    pub summaries: Vec<GroupSummary>,
    pub files: Vec<FileEntry>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    /// Copy with the wall-clock time zeroed, for comparing runs.
    pub fn without_wall_clock(&self) -> Self {
        Self { wall_clock_seconds: 0.0, ..self.clone() }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the config together with the resolved kernel matrix.
pub fn config_hash(cfg: &ExperimentConfig, model: &KernelMatrixSpec) -> String {
    let doc = serde_json::json!({ "config": cfg, "model": model });
    sha256_hex(serde_json::to_string(&doc).expect("serialisable").as_bytes())
}

/// `500` for integral horizons, `12p5` otherwise.
pub fn horizon_tag(t: f64) -> String {
    if t.fract() == 0.0 && t.abs() < 1e15 {
        format!("{}", t as i64)
    } else {
        format!("{t}").replace('.', "p")
    }
}

/// The output directory and the data files written into it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root.join("paths"))?;
        Ok(Self { root: root.to_path_buf() })
    }

    /// Writes `bytes` to `rel` and returns its manifest entry.
    pub fn write(&self, rel: &str, bytes: &[u8]) -> Result<FileEntry> {
        let full = self.root.join(rel);
        if let Some(parent) = full.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&full, bytes)?;
        Ok(FileEntry { path: rel.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 })
    }

    pub fn write_manifest(&self, m: &RunManifest) -> Result<()> {
        fs::write(self.root.join("manifest.json"), serde_json::to_string_pretty(m)? + "\n")?;
        Ok(())
    }
}
