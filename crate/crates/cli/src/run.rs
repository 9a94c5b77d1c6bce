//! Run-directory layout, tracked writes and the timestamp manifest.

use std::cell::RefCell;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use geollm::io::write_string_atomic;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub struct RunDir {
    pub root: PathBuf,
    /// Files this command created, removed again if it fails.
    created: RefCell<Vec<PathBuf>>,
}

impl RunDir {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
            created: RefCell::new(Vec::new()),
        }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn config(&self) -> PathBuf {
        self.path("config.toml")
    }
    pub fn dataset(&self) -> PathBuf {
        self.path("dataset.csv")
    }
    pub fn raster(&self) -> PathBuf {
        self.path("raster.asc")
    }
    pub fn value_raster(&self) -> PathBuf {
        self.path("values.asc")
    }
    pub fn splits(&self) -> PathBuf {
        self.path("splits.json")
    }
    pub fn labels(&self) -> PathBuf {
        self.path("labels.json")
    }
    pub fn contexts(&self) -> PathBuf {
        self.path("contexts.jsonl")
    }
    pub fn prompts(&self) -> PathBuf {
        self.path("prompts.jsonl")
    }
    pub fn world(&self) -> PathBuf {
        self.path("synth/world.json")
    }

    /// Atomically writes `contents`, remembering new files for rollback.
    pub fn write(&self, path: &Path, contents: &str) -> Result<()> {
        let existed = path.exists();
        write_string_atomic(path, contents).with_context(|| format!("writing {}", path.display()))?;
        if !existed {
            self.created.borrow_mut().push(path.to_path_buf());
        }
        Ok(())
    }

    /// Registers a file written by a library helper.
    pub fn track(&self, path: &Path, existed: bool) {
        if !existed {
            self.created.borrow_mut().push(path.to_path_buf());
        }
    }

    pub fn rollback(&self) {
        for p in self.created.borrow_mut().drain(..).rev() {
            let _ = std::fs::remove_file(&p);
        }
    }

    pub fn save_config(&self, config: &RunConfig) -> Result<()> {
        self.write(&self.config(), &config.rebased(&self.root).to_toml())
    }

    pub fn rel(&self, path: &Path) -> String {
        path.strip_prefix(&self.root).unwrap_or(path).display().to_string()
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Manifest {
    stages: Vec<StageEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StageEntry {
    command: String,
    args: Vec<String>,
    started_at: String,
    finished_at: String,
    ok: bool,
}

/// Appends one entry to `manifest.json`, the only file in a run directory
/// that holds wall-clock times.
pub fn record_stage(root: &Path, command: &str, started: chrono::DateTime<Utc>, ok: bool) -> Result<()> {
    if !root.exists() {
        return Ok(());
    }
    let path = root.join("manifest.json");
    let mut manifest: Manifest = match std::fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text).unwrap_or_default(),
        Err(_) => Manifest::default(),
    };
    manifest.stages.push(StageEntry {
        command: command.to_string(),
        args: std::env::args().skip(1).collect(),
        started_at: started.to_rfc3339_opts(SecondsFormat::Millis, true),
        finished_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        ok,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_string_atomic(&path, &text)?;
    Ok(())
}
