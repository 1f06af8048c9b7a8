use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: PathBuf,
    pub sha256: String,
}

/// Provenance record written once per command invocation.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<PathBuf>,
    pub threads: usize,
    pub wall_time_s: f64,
    pub started_unix: u64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Collects inputs and outputs while a command runs.
pub struct Recorder {
    command: &'static str,
    config: serde_json::Value,
    inputs: Vec<InputHash>,
    outputs: Vec<PathBuf>,
    start: Instant,
    started_unix: u64,
}

impl Recorder {
    pub fn start(command: &'static str) -> Self {
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Self {
            command,
            config: serde_json::Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
            start: Instant::now(),
            started_unix,
        }
    }

    pub fn config(&mut self, config: impl Serialize) -> Result<()> {
        self.config = serde_json::to_value(config)?;
        Ok(())
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(InputHash { path: path.to_path_buf(), sha256 });
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Writes the manifest to `path` and returns it.
    pub fn finish(self, path: &Path) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs,
            threads: rayon::current_num_threads(),
            wall_time_s: self.start.elapsed().as_secs_f64(),
            started_unix: self.started_unix,
        };
        fs::write(path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(manifest)
    }
}

/// `feats.npy` → `feats.manifest.json`, next to the file.
pub fn beside(path: &Path) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.manifest.json"))
}
