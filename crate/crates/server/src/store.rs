//! Append-only ingest log with last-write-wins reads.
//!
//! Each line of the log is one JSON object:
//! `{"received_at":"<ts>","source":"<peer>","table":{<canonical table>}}`.
//! A record is visible to queries only after its line has been written and
//! synced; a failed write is truncated away.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thermowatch_core::time::{self, Timestamp};
use thermowatch_core::{RoiId, RoiTable};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("log {path}: line {line}: {message}")]
    Replay { path: PathBuf, line: usize, message: String },
    #[error("log storage failure: {0}")]
    Storage(#[from] std::io::Error),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestRecord {
    #[serde(with = "time::serde_secs")]
    pub received_at: Timestamp,
    pub source: String,
    pub table: RoiTable,
}

impl IngestRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }

    pub fn parse_line(line: &str) -> Result<Self, String> {
        let record: IngestRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        record.table.validate().map_err(|e| e.to_string())?;
        let mut record = record;
        record.table.normalize();
        Ok(record)
    }
}

/// `from` and `to` are inclusive. With `only_alarms`, a table qualifies when
/// it has at least one alarm bit set, restricted to `roi_id` when given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlarmQuery {
    pub camera_id: Option<String>,
    pub from: Option<Timestamp>,
    pub to: Option<Timestamp>,
    pub roi_id: Option<RoiId>,
    pub only_alarms: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub tables_ingested: usize,
    /// Tables with the alarm bit set, per ROI id `1..=9`.
    pub alarms_by_roi: BTreeMap<u8, usize>,
    pub cameras_reporting: usize,
}

type Key = (String, Timestamp);

#[derive(Debug)]
pub struct Store {
    path: PathBuf,
    file: File,
    len: u64,
    /// Every record in log order.
    records: Vec<IngestRecord>,
    /// Latest record per key, by (timestamp, camera) for ordered scans.
    latest: BTreeMap<(Timestamp, String), usize>,
}

fn check_range(from: Option<Timestamp>, to: Option<Timestamp>) -> Result<(), StoreError> {
    match (from, to) {
        (Some(f), Some(t)) if f > t => Err(StoreError::InvalidQuery(format!(
            "range start {} is after end {}",
            time::format(&f),
            time::format(&t)
        ))),
        _ => Ok(()),
    }
}

impl Store {
    /// Opens (creating if needed) the log at `path` and replays it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).read(true).append(true).open(&path)?;
        let mut store = Store {
            path: path.clone(),
            len: 0,
            file,
            records: Vec::new(),
            latest: BTreeMap::new(),
        };
        let mut reader = BufReader::new(File::open(&path)?);
        let mut buf = Vec::new();
        let mut line_no = 0;
        loop {
            buf.clear();
            if reader.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            line_no += 1;
            let replay_err = |message: String| StoreError::Replay {
                path: path.clone(),
                line: line_no,
                message,
            };
            let Some(body) = buf.strip_suffix(b"\n") else {
                return Err(replay_err("unterminated last line".into()));
            };
            let text = std::str::from_utf8(body).map_err(|e| replay_err(e.to_string()))?;
            if text.trim().is_empty() {
                return Err(replay_err("empty line".into()));
            }
            let record = IngestRecord::parse_line(text).map_err(replay_err)?;
            store.index(record);
        }
        store.len = store.file.metadata()?.len();
        Ok(store)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn index(&mut self, record: IngestRecord) {
        let key = (record.table.timestamp, record.table.camera_id.clone());
        self.records.push(record);
        self.latest.insert(key, self.records.len() - 1);
    }

    /// Appends and syncs one record. On failure the log is cut back to its
    /// previous length and the record stays invisible.
    pub fn append(&mut self, record: IngestRecord) -> Result<Key, StoreError> {
        let mut line = record.to_line();
        line.push('\n');
        let written = self
            .file
            .write_all(line.as_bytes())
            .and_then(|()| self.file.sync_data());
        if let Err(e) = written {
            let _ = self.file.set_len(self.len);
            return Err(StoreError::Storage(e));
        }
        self.len += line.len() as u64;
        let key = (record.table.camera_id.clone(), record.table.timestamp);
        self.index(record);
        Ok(key)
    }

    /// Every ingest, duplicates included, in log order.
    pub fn log(&self) -> &[IngestRecord] {
        &self.records
    }

    fn deduped(&self, from: Option<Timestamp>, to: Option<Timestamp>) -> impl Iterator<Item = &RoiTable> {
        self.latest
            .iter()
            .filter(move |((ts, _), _)| from.is_none_or(|f| *ts >= f) && to.is_none_or(|t| *ts <= t))
            .map(|(_, &i)| &self.records[i].table)
    }

    /// Deduplicated tables matching `q`, ordered by timestamp then camera.
    pub fn query(&self, q: &AlarmQuery) -> Result<Vec<RoiTable>, StoreError> {
        check_range(q.from, q.to)?;
        Ok(self
            .deduped(q.from, q.to)
            .filter(|t| q.camera_id.as_deref().is_none_or(|c| t.camera_id == c))
            .filter(|t| {
                !q.only_alarms
                    || t.rows
                        .iter()
                        .any(|r| r.alarm_bit == 1 && q.roi_id.is_none_or(|roi| r.roi_id == roi.get()))
            })
            .cloned()
            .collect())
    }

    pub fn stats(&self, from: Option<Timestamp>, to: Option<Timestamp>) -> Result<Stats, StoreError> {
        check_range(from, to)?;
        let mut alarms_by_roi: BTreeMap<u8, usize> = RoiId::all().map(|r| (r.get(), 0)).collect();
        let mut cameras = BTreeSet::new();
        let mut tables = 0;
        for t in self.deduped(from, to) {
            tables += 1;
            cameras.insert(t.camera_id.as_str());
            for r in t.rows.iter().filter(|r| r.alarm_bit == 1) {
                *alarms_by_roi.entry(r.roi_id).or_default() += 1;
            }
        }
        Ok(Stats {
            tables_ingested: tables,
            alarms_by_roi,
            cameras_reporting: cameras.len(),
        })
    }
}
