//! Append-only JSON-lines store of recorded corpus responses.
//!
//! Each line is `{key, kind, params, payload, fetched_at}`. When a key is
//! recorded more than once the last line wins.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::request::{CorpusRequest, Payload, RequestKind};
use super::CorpusError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub key: String,
    pub kind: RequestKind,
    pub params: Vec<String>,
    pub payload: Payload,
    pub fetched_at: DateTime<Utc>,
}

impl FixtureRecord {
    pub fn new(request: &CorpusRequest, payload: Payload, fetched_at: DateTime<Utc>) -> Self {
        FixtureRecord {
            key: request.canonical_key(),
            kind: request.kind(),
            params: request.params().to_vec(),
            payload,
            fetched_at,
        }
    }
}

#[derive(Debug, Default)]
pub struct FixtureStore {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<String, FixtureRecord>>,
    writer: Option<Mutex<BufWriter<File>>>,
}

impl FixtureStore {
    /// Empty store that lives only in memory.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Read-only store loaded from `path`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let file =
            File::open(path).map_err(|e| CorpusError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        let entries = Self::read_lines(BufReader::new(file), path)?;
        Ok(FixtureStore { path: Some(path.to_path_buf()), entries: RwLock::new(entries), writer: None })
    }

    /// Store that appends new records to `path`, creating it if needed and
    /// keeping whatever was already recorded there.
    pub fn open_for_record(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let io_err = |e: std::io::Error| CorpusError::Io { path: path.to_path_buf(), message: e.to_string() };
        let entries = if path.exists() {
            Self::read_lines(BufReader::new(File::open(path).map_err(io_err)?), path)?
        } else {
            HashMap::new()
        };
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io_err)?;
        Ok(FixtureStore {
            path: Some(path.to_path_buf()),
            entries: RwLock::new(entries),
            writer: Some(Mutex::new(BufWriter::new(file))),
        })
    }

    fn read_lines<R: BufRead>(reader: R, path: &Path) -> Result<HashMap<String, FixtureRecord>, CorpusError> {
        let mut entries = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| CorpusError::Io { path: path.to_path_buf(), message: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| CorpusError::FixtureFormat { path: path.to_path_buf(), line: i + 1, message };
            let record: FixtureRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            let rebuilt = CorpusRequest::new(record.kind, &record.params);
            if rebuilt.canonical_key() != record.key {
                return Err(bad(format!(
                    "key `{}` does not match kind/params (expected `{}`)",
                    record.key,
                    rebuilt.canonical_key()
                )));
            }
            if record.kind.is_count() != record.payload.as_count().is_some() {
                return Err(bad(format!("payload shape does not fit `{}`", record.kind)));
            }
            entries.insert(record.key.clone(), record);
        }
        Ok(entries)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &str) -> Option<FixtureRecord> {
        self.entries.read().expect("fixture lock").get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("fixture lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Insert (or replace) a record; appended to the backing file when the
    /// store was opened for recording.
    pub fn insert(&self, record: FixtureRecord) -> Result<(), CorpusError> {
        if let Some(writer) = &self.writer {
            let mut writer = writer.lock().expect("fixture writer lock");
            let line = serde_json::to_string(&record).expect("fixture record serializes");
            let io_err = |e: std::io::Error| CorpusError::Io {
                path: self.path.clone().unwrap_or_default(),
                message: e.to_string(),
            };
            writeln!(writer, "{line}").map_err(io_err)?;
            writer.flush().map_err(io_err)?;
        }
        self.entries.write().expect("fixture lock").insert(record.key.clone(), record);
        Ok(())
    }

    /// All records sorted by key.
    pub fn records(&self) -> Vec<FixtureRecord> {
        let mut records: Vec<FixtureRecord> = self.entries.read().expect("fixture lock").values().cloned().collect();
        records.sort_by(|a, b| a.key.cmp(&b.key));
        records
    }

    /// Write every record, sorted by key, as JSON lines.
    pub fn write_sorted<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in self.records() {
            writeln!(out, "{}", serde_json::to_string(&record).expect("fixture record serializes"))?;
        }
        Ok(())
    }
}
