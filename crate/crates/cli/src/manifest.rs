//! Run manifests: what was run, from which config, producing which files.
//!
//! Every pipeline run writes a manifest recording the tool version, the
//! config hash, per-stage wall-clock, and a checksummed inventory of the
//! files each stage produced.  Checksums make reproducibility checkable:
//! two runs from the same config and seed must produce identical payload
//! files (the manifest itself carries timings and is exempt).

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, CliError, Result};

/// One produced file: path relative to the run directory plus checksum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the run directory.
    pub path: String,
    /// SHA-256 of the file contents, lowercase hex.
    pub sha256: String,
}

/// One completed pipeline stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    /// Stage tag.
    pub name: String,
    /// Wall-clock time [ms].
    pub wall_ms: u64,
    /// Files the stage wrote.
    pub outputs: Vec<FileRecord>,
}

/// Record of one pipeline run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Workbench version.
    pub version: String,
    /// SHA-256 of the canonical config JSON.
    pub config_hash: String,
    /// Master seed of the run.
    pub seed: u64,
    /// Stages in execution order.
    pub stages: Vec<StageRecord>,
    /// Set when the pipeline aborted; earlier stages remain recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
}

impl RunManifest {
    /// Fresh manifest for a run.
    pub fn new(config_hash: String, seed: u64) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            seed,
            stages: Vec::new(),
            failed_stage: None,
        }
    }

    /// Runs `stage`, times it, checksums the files it reports, and records
    /// the result.  On failure the stage is marked and the error is tagged
    /// for exit-code 4.
    pub fn run_stage<T>(
        &mut self,
        name: &'static str,
        run_dir: &Path,
        stage: impl FnOnce() -> Result<(T, Vec<std::path::PathBuf>)>,
    ) -> Result<T> {
        let start = Instant::now();
        match stage() {
            Ok((value, files)) => {
                let mut outputs = Vec::with_capacity(files.len());
                for file in files {
                    outputs.push(file_record(run_dir, &file)?);
                }
                self.stages.push(StageRecord {
                    name: name.to_string(),
                    wall_ms: start.elapsed().as_millis() as u64,
                    outputs,
                });
                Ok(value)
            }
            Err(e) => {
                self.failed_stage = Some(name.to_string());
                Err(CliError::in_stage(e, name))
            }
        }
    }

    /// Writes the manifest as pretty JSON.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Checksummed record of `file`, stored relative to `run_dir`.
fn file_record(run_dir: &Path, file: &Path) -> Result<FileRecord> {
    let bytes = std::fs::read(file)
        .map_err(|e| invalid(format!("stage output {} unreadable: {e}", file.display())))?;
    let digest = Sha256::digest(&bytes);
    let relative = file.strip_prefix(run_dir).unwrap_or(file);
    Ok(FileRecord {
        path: relative.to_string_lossy().replace('\\', "/"),
        sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
    })
}
