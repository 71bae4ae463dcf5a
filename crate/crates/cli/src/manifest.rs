//! Run manifest: what was run, with which settings, and a hash of every
//! file written.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub sha256: String,
    pub bytes: u64,
}

/// Comparison of this run's files with the previous run in the same
/// output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReproAudit {
    pub compared: bool,
    pub note: String,
    pub matched: Vec<String>,
    pub mismatched: Vec<String>,
}

impl ReproAudit {
    pub fn skipped(note: impl Into<String>) -> Self {
        Self { compared: false, note: note.into(), matched: Vec::new(), mismatched: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.compared && self.mismatched.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub rng: String,
    pub design: serde_json::Value,
    pub data: serde_json::Value,
    pub files: BTreeMap<String, FileEntry>,
    pub reproducibility: ReproAudit,
}

pub fn hash_file(path: &Path) -> Result<FileEntry, CliError> {
    let bytes = std::fs::read(path).map_err(CliError::io(path))?;
    Ok(FileEntry { sha256: hex::encode(Sha256::digest(&bytes)), bytes: bytes.len() as u64 })
}

/// Hashes every regular file in `dir` except the manifest itself.
pub fn hash_dir(dir: &Path) -> Result<BTreeMap<String, FileEntry>, CliError> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(CliError::io(dir))? {
        let entry = entry.map_err(CliError::io(dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name == MANIFEST_FILE || !entry.path().is_file() {
            continue;
        }
        out.insert(name, hash_file(&entry.path())?);
    }
    Ok(out)
}

pub fn read_manifest(path: &Path) -> Option<Manifest> {
    let text = std::fs::read_to_string(path).ok()?;
    serde_json::from_str(&text).ok()
}

/// Files shared by both runs are compared by hash. Runs with a different
/// config or seed are not compared.
pub fn audit(previous: Option<&Manifest>, config_hash: &str, seed: u64, files: &BTreeMap<String, FileEntry>) -> ReproAudit {
    let Some(prev) = previous else {
        return ReproAudit::skipped("no previous manifest");
    };
    if prev.config_hash != config_hash || prev.seed != seed {
        return ReproAudit::skipped("previous run used a different config or seed");
    }
    let mut a = ReproAudit { compared: true, note: "same config and seed".into(), matched: Vec::new(), mismatched: Vec::new() };
    for (name, entry) in files {
        match prev.files.get(name) {
            Some(old) if old.sha256 == entry.sha256 => a.matched.push(name.clone()),
            Some(_) => a.mismatched.push(name.clone()),
            None => {}
        }
    }
    a
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Data(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(CliError::io(&path))
}
