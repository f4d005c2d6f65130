//! Run manifests: enough to reproduce a command bit for bit.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::container::write_atomic;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    /// Fully resolved settings, defaults included.
    pub settings: serde_json::Value,
    pub seeds: Vec<u64>,
    pub version: String,
    pub inputs: Vec<InputFile>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn input_file(path: &Path) -> Result<InputFile> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(InputFile {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

impl RunManifest {
    pub fn new(command: &str, settings: serde_json::Value, seeds: Vec<u64>) -> Self {
        Self {
            command: command.to_string(),
            args: std::env::args().collect(),
            settings,
            seeds,
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            started_unix: unix_now(),
            finished_unix: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(input_file(path)?);
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// `<primary output>.manifest.json`.
    pub fn path_for(primary: &Path) -> PathBuf {
        let mut name = primary.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        primary.with_file_name(name)
    }

    /// Stamps the finish time and writes the manifest atomically.
    pub fn finish(mut self, primary: &Path) -> Result<PathBuf> {
        self.finished_unix = unix_now();
        let path = Self::path_for(primary);
        let json = serde_json::to_vec_pretty(&self)?;
        write_atomic(&path, &json)?;
        Ok(path)
    }
}
