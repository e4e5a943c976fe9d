//! Directory-per-dataset store:
//! `<root>/<id>/metadata.json` and `<root>/<id>/files/<name>`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::fetch::content_hash;
use crate::model::{is_valid_id, DatasetRecord};
use crate::{io_err, read_file, HarvestError};

const METADATA: &str = "metadata.json";
const SYNC_DIR: &str = ".sync";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpsertOutcome {
    Created,
    Updated,
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredDataset {
    #[serde(flatten)]
    pub record: DatasetRecord,
    /// Earlier version strings, oldest first.
    #[serde(default)]
    pub version_history: Vec<String>,
    pub harvested_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SyncState {
    last_sync: DateTime<Utc>,
}

/// Upserts are serialized by an in-process lock; one store directory should
/// be written by one process at a time.
#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    lock: Mutex<()>,
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), HarvestError> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, HarvestError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| io_err(&root, e))?;
        Ok(Store {
            root,
            lock: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dataset_dir(&self, id: &str) -> Result<PathBuf, HarvestError> {
        if !is_valid_id(id) {
            return Err(HarvestError::Validation(format!("bad dataset id {id:?}")));
        }
        Ok(self.root.join(id))
    }

    /// Stores `record` with the given distribution files. Each file must be
    /// named by exactly one distribution's `file_name`; its hash and size are
    /// filled in from the bytes.
    pub fn upsert(&self, mut record: DatasetRecord, files: &[(String, Vec<u8>)]) -> Result<(String, UpsertOutcome), HarvestError> {
        for (name, bytes) in files {
            let dist = record
                .distributions
                .iter_mut()
                .find(|d| d.file_name.as_deref() == Some(name))
                .ok_or_else(|| HarvestError::Validation(format!("file {name} belongs to no distribution")))?;
            dist.content_hash = Some(content_hash(bytes));
            dist.byte_size = bytes.len() as u64;
        }
        record.validate()?;
        let names: BTreeSet<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
        if names.len() != files.len() {
            return Err(HarvestError::Validation("duplicate file name".into()));
        }

        let _guard = self.lock.lock().map_err(|_| HarvestError::Internal("store lock poisoned".into()))?;
        let id = record.id.clone();
        let previous = self.load(&id)?;
        let (outcome, version_history) = match previous {
            Some(prev) if prev.record == record => return Ok((id, UpsertOutcome::Unchanged)),
            Some(prev) => {
                let mut history = prev.version_history;
                history.push(prev.record.version);
                (UpsertOutcome::Updated, history)
            }
            None => (UpsertOutcome::Created, Vec::new()),
        };

        let dir = self.dataset_dir(&id)?;
        let files_dir = dir.join("files");
        fs::create_dir_all(&files_dir).map_err(|e| io_err(&files_dir, e))?;
        for (name, bytes) in files {
            write_atomically(&files_dir.join(name), bytes)?;
        }
        // drop files no distribution refers to any more
        let keep: BTreeSet<&str> = record.distributions.iter().filter_map(|d| d.file_name.as_deref()).collect();
        for entry in fs::read_dir(&files_dir).map_err(|e| io_err(&files_dir, e))? {
            let entry = entry.map_err(|e| io_err(&files_dir, e))?;
            let name = entry.file_name();
            if !keep.contains(name.to_string_lossy().as_ref()) {
                fs::remove_file(entry.path()).map_err(|e| io_err(&entry.path(), e))?;
            }
        }
        let stored = StoredDataset {
            record,
            version_history,
            harvested_at: now(),
        };
        let json = serde_json::to_string_pretty(&stored)? + "\n";
        write_atomically(&dir.join(METADATA), json.as_bytes())?;
        Ok((id, outcome))
    }

    pub fn load(&self, id: &str) -> Result<Option<StoredDataset>, HarvestError> {
        let path = self.dataset_dir(id)?.join(METADATA);
        if !path.exists() {
            return Ok(None);
        }
        Ok(Some(serde_json::from_slice(&read_file(&path)?)?))
    }

    /// Dataset ids, sorted.
    pub fn ids(&self) -> Result<Vec<String>, HarvestError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root).map_err(|e| io_err(&self.root, e))? {
            let entry = entry.map_err(|e| io_err(&self.root, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if is_valid_id(&name) && entry.path().join(METADATA).is_file() {
                ids.push(name);
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn load_all(&self) -> Result<Vec<StoredDataset>, HarvestError> {
        self.ids()?
            .iter()
            .map(|id| self.load(id).map(|d| d.expect("listed dataset has metadata")))
            .collect()
    }

    pub fn read_distribution(&self, id: &str, file_name: &str) -> Result<Vec<u8>, HarvestError> {
        if !is_valid_id(file_name) {
            return Err(HarvestError::Validation(format!("bad file name {file_name:?}")));
        }
        read_file(&self.dataset_dir(id)?.join("files").join(file_name))
    }

    pub fn last_sync(&self, source_id: &str) -> Result<Option<DateTime<Utc>>, HarvestError> {
        let path = self.root.join(SYNC_DIR).join(format!("{source_id}.json"));
        if !path.exists() {
            return Ok(None);
        }
        let state: SyncState = serde_json::from_slice(&read_file(&path)?)?;
        Ok(Some(state.last_sync))
    }

    pub fn record_sync(&self, source_id: &str, at: DateTime<Utc>) -> Result<(), HarvestError> {
        let dir = self.root.join(SYNC_DIR);
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let json = serde_json::to_string_pretty(&SyncState { last_sync: at })? + "\n";
        write_atomically(&dir.join(format!("{source_id}.json")), json.as_bytes())
    }
}

fn now() -> DateTime<Utc> {
    // whole seconds keep metadata stable under a JSON round trip
    let t = Utc::now();
    DateTime::parse_from_rfc3339(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
        .map(|t| t.with_timezone(&Utc))
        .unwrap_or(t)
}
