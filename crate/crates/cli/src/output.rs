//! Atomic file output and run manifests.

use anyhow::{Context, Result};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Record of one run, written next to its first output as
/// `<output>.manifest.json`.
#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq)]
pub struct ExperimentManifest {
    pub command: String,
    /// Arguments after the program name; `qcmc replay` re-runs them.
    pub argv: Vec<String>,
    pub parameters: serde_json::Value,
    pub seeds: Vec<u32>,
    pub outputs: Vec<String>,
    pub toolkit_version: String,
    pub timestamp_unix: u64,
}

impl ExperimentManifest {
    pub fn new(command: &str, argv: &[String], parameters: impl Serialize, seeds: Vec<u32>, outputs: &[&Path]) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            argv: argv.to_vec(),
            parameters: serde_json::to_value(parameters)?,
            seeds,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        })
    }

    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        output.with_file_name(name)
    }

    /// Writes the manifest next to the first output (no-op without outputs).
    pub fn write(&self) -> Result<()> {
        if let Some(first) = self.outputs.first() {
            let path = Self::path_for(Path::new(first));
            write_atomic(&path, &(serde_json::to_string_pretty(self)? + "\n"))?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}
