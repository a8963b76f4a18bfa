use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Path relative to the run directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Provenance record written after every other output of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub scenario: String,
    pub run_dir: PathBuf,
    /// Canonical TOML of the configuration that produced the run.
    pub config: String,
    pub config_sha256: String,
    pub started_utc: String,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileDigest>,
}

impl RunManifest {
    /// Hashes each listed file under `run_dir`.
    pub fn digest_files(run_dir: &Path, names: &[String]) -> Result<Vec<FileDigest>> {
        names
            .iter()
            .map(|name| {
                let bytes = fs::read(run_dir.join(name))?;
                Ok(FileDigest { path: name.clone(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 })
            })
            .collect()
    }

    pub fn write(&self) -> Result<PathBuf> {
        let path = self.run_dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidArgument(format!("manifest serialisation: {e}")))?;
        fs::write(&path, json + "\n")?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
    }

    /// Files whose current content no longer matches the recorded digest.
    pub fn mismatches(&self) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for f in &self.files {
            let bytes = fs::read(self.run_dir.join(&f.path))?;
            if sha256_hex(&bytes) != f.sha256 {
                bad.push(f.path.clone());
            }
        }
        Ok(bad)
    }
}
