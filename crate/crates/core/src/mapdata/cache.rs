use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::MapError;

#[derive(Serialize, Deserialize)]
struct CacheLine {
    k: String,
    v: String,
}

/// Append-only key-value store backed by a JSONL log.
///
/// Readers share an in-memory map; writers append under a lock. On reload the
/// last entry for a key wins.
#[derive(Debug, Default)]
pub struct KvCache {
    entries: RwLock<HashMap<String, String>>,
    log: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl KvCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self, MapError> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut entries = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(&path)?).lines() {
                let line = line?;
                // a torn final line from an interrupted write is ignored
                if let Ok(entry) = serde_json::from_str::<CacheLine>(&line) {
                    entries.insert(entry.k, entry.v);
                }
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
        let len = file.metadata()?.len();
        if len > 0 {
            let bytes = std::fs::read(&path)?;
            if bytes.last() != Some(&b'\n') {
                file.write_all(b"\n")?;
            }
        }
        Ok(Self {
            entries: RwLock::new(entries),
            log: Some(Mutex::new(file)),
            path: Some(path),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.entries.read().expect("cache lock").get(key).cloned()
    }

    pub fn put(&self, key: &str, value: &str) -> Result<(), MapError> {
        if let Some(log) = &self.log {
            let line = serde_json::to_string(&CacheLine {
                k: key.to_string(),
                v: value.to_string(),
            })
            .expect("cache line serializes");
            let mut f = log.lock().expect("cache log lock");
            writeln!(f, "{line}")?;
            f.flush()?;
        }
        self.entries
            .write()
            .expect("cache lock")
            .insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
