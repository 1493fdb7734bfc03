//! Artifact writing with checksums, and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Formats a float so that it parses back to the same value; plain decimal
/// for moderate magnitudes, exponent notation otherwise.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Writes files below a root directory and remembers their checksums.
pub struct ArtifactWriter {
    root: PathBuf,
    files: BTreeMap<String, FileEntry>,
}

impl ArtifactWriter {
    pub fn new(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(ArtifactWriter { root: root.to_path_buf(), files: BTreeMap::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_bytes(&mut self, rel: &str, data: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, data)?;
        self.files.insert(
            rel.to_string(),
            FileEntry { path: rel.to_string(), sha256: hex::encode(Sha256::digest(data)), bytes: data.len() },
        );
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write_bytes(rel, text.as_bytes())
    }

    /// Writes a numeric table with a header row.
    pub fn write_table(&mut self, rel: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(header)?;
        for r in rows {
            wtr.write_record(r.iter().map(|v| fmt_f64(*v)))?;
        }
        let data = wtr.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        self.write_bytes(rel, &data)
    }

    /// Writes a table of preformatted string cells.
    pub fn write_records(&mut self, rel: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(header)?;
        for r in rows {
            wtr.write_record(r)?;
        }
        let data = wtr.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        self.write_bytes(rel, &data)
    }

    pub fn files(&self) -> Vec<FileEntry> {
        self.files.values().cloned().collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSummary {
    pub kind: String,
    pub nodes: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub min_spacing: f64,
}

/// Index of a run directory. The manifest lists every other file in the
/// directory with its checksum; it carries no timestamps so that reruns
/// reproduce it exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_sha256: String,
    pub code_version: String,
    pub grid: Option<GridSummary>,
    pub stop_reason: Option<String>,
    /// Stage that aborted the run, with its error message.
    pub failure: Option<(String, String)>,
    pub verdict_pass: bool,
    pub files: Vec<FileEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn config_hash(config_toml: &str) -> String {
    hex::encode(Sha256::digest(config_toml.as_bytes()))
}

pub fn write_manifest(root: &Path, manifest: &RunManifest) -> Result<()> {
    std::fs::write(root.join(MANIFEST_FILE), serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(())
}

pub fn read_manifest(root: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_str(&std::fs::read_to_string(root.join(MANIFEST_FILE))?)?)
}
