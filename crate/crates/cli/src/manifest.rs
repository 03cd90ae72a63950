use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use ssp_core::{ModelKind, TrainConfig};

use crate::prepared::{file_digest, Prepared};

/// Provenance record for one training run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    command: String,
    model: ModelKind,
    config: TrainConfig,
    prepared: String,
    prep_hash: String,
    digests: Vec<(String, String)>,
    artifacts: Vec<String>,
    timings: Vec<(String, f64)>,
}

impl RunManifest {
    pub fn new(command: String, config: &TrainConfig, model: ModelKind, prep: &Prepared) -> Result<Self> {
        let mut digests: Vec<(String, String)> = prep
            .manifest
            .iter()
            .filter(|(k, _)| k.starts_with("digest_"))
            .map(|(k, v)| (format!("source_{}", &k["digest_".len()..]), v.clone()))
            .collect();
        let mut entries: Vec<_> = std::fs::read_dir(&prep.dir)
            .with_context(|| format!("listing {}", prep.dir.display()))?
            .collect::<std::io::Result<Vec<_>>>()?;
        entries.sort_by_key(|e| e.file_name());
        for e in entries {
            if e.file_type()?.is_file() {
                digests.push((e.file_name().to_string_lossy().into_owned(), file_digest(&e.path())?));
            }
        }
        Ok(RunManifest {
            command,
            model,
            config: config.clone(),
            prepared: prep.dir.display().to_string(),
            prep_hash: prep.prep_hash.clone(),
            digests,
            artifacts: Vec::new(),
            timings: Vec::new(),
        })
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.display().to_string());
    }

    pub fn timing(&mut self, name: &str, secs: f64) {
        self.timings.push((name.to_owned(), secs));
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "model = {}", self.model);
        let _ = writeln!(s, "seed = {}", self.config.seed);
        let _ = writeln!(s, "config_hash = {}", self.config.hash());
        let _ = writeln!(s, "prepared = {}", self.prepared);
        let _ = writeln!(s, "prep_hash = {}", self.prep_hash);
        for (name, d) in &self.digests {
            let _ = writeln!(s, "digest {name} = {d}");
        }
        for a in &self.artifacts {
            let _ = writeln!(s, "artifact = {a}");
        }
        for (name, secs) in &self.timings {
            let _ = writeln!(s, "time {name} = {secs:.3}");
        }
        s.push_str("\n[config]\n");
        s.push_str(&self.config.to_text());
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).with_context(|| format!("writing {}", path.display()))
    }
}
