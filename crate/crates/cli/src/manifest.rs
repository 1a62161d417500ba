use crate::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Everything needed to rerun a command and check its outputs.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    pub config_sha256: Option<String>,
    pub seeds: BTreeMap<String, u64>,
    pub threads: usize,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub timings_s: BTreeMap<String, f64>,
    pub summary: serde_json::Value,
}

/// Output directory that records what is written into it.
pub struct Run {
    dir: PathBuf,
    started: Instant,
    stage: Instant,
    pub manifest: Manifest,
}

impl Run {
    pub fn new(command: &str, dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let now = Instant::now();
        Ok(Run {
            dir: dir.to_path_buf(),
            started: now,
            stage: now,
            manifest: Manifest {
                tool: "tlsnoise",
                version: env!("CARGO_PKG_VERSION"),
                command: command.into(),
                argv: std::env::args().collect(),
                config_sha256: None,
                seeds: BTreeMap::new(),
                threads: rayon::current_num_threads(),
                inputs: vec![],
                outputs: vec![],
                timings_s: BTreeMap::new(),
                summary: serde_json::Value::Null,
            },
        })
    }

    pub fn config(&mut self, canonical_json: &str) {
        self.manifest.config_sha256 = Some(sha256_hex(canonical_json.as_bytes()));
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.manifest.seeds.insert(name.into(), seed);
    }

    pub fn input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.manifest.inputs.push(FileRecord { path: path.display().to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() });
        Ok(bytes)
    }

    /// Marks the end of a stage.
    pub fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.manifest.timings_s.insert(name.into(), (now - self.stage).as_secs_f64());
        self.stage = now;
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.manifest.outputs.push(FileRecord { path: name.into(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable");
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn finish(mut self, summary: serde_json::Value) -> Result<(), CliError> {
        self.manifest.timings_s.insert("total".into(), self.started.elapsed().as_secs_f64());
        self.manifest.summary = summary;
        let path = self.dir.join("manifest.json");
        let mut s = serde_json::to_string_pretty(&self.manifest).expect("serializable");
        s.push('\n');
        std::fs::write(&path, s).map_err(|e| CliError::io(&path, e))
    }
}
