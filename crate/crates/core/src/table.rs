//! The per-frame result table and its canonical JSON form.
//!
//! Canonical serialization is a single-line JSON object with the fields in
//! this order: `camera_id`, `timestamp`, `rows`; each row carries `roi_id`,
//! `name`, `recorded_c`, `predicted_c` (number or `null`), `alarm_bit` and
//! `model_status`. Rows are sorted by `roi_id`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::alarm::{Evaluation, ModelStatus};
use crate::error::{Error, Result};
use crate::extract::RoiReading;
use crate::frame::validate_camera_id;
use crate::mask::{RoiId, ROI_COUNT};
use crate::time::{self, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiRow {
    pub roi_id: u8,
    pub name: String,
    pub recorded_c: f64,
    pub predicted_c: Option<f64>,
    pub alarm_bit: u8,
    pub model_status: ModelStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiTable {
    pub camera_id: String,
    #[serde(with = "time::serde_secs")]
    pub timestamp: Timestamp,
    pub rows: Vec<RoiRow>,
}

/// Why a table failed validation. `code()` is the machine-readable reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableRejection {
    MalformedJson(String),
    CameraId,
    RowCount(usize),
    RoiIdRange(u8),
    DuplicateRoi(u8),
    AlarmBitRange(u8),
    AlarmWithoutModel(u8),
    PredictionStatusMismatch(u8),
    NonFinite(u8),
    EmptyName(u8),
}

impl TableRejection {
    pub fn code(&self) -> &'static str {
        match self {
            TableRejection::MalformedJson(_) => "malformed_json",
            TableRejection::CameraId => "camera_id",
            TableRejection::RowCount(_) => "row_count",
            TableRejection::RoiIdRange(_) => "roi_id_range",
            TableRejection::DuplicateRoi(_) => "duplicate_roi",
            TableRejection::AlarmBitRange(_) => "alarm_bit_range",
            TableRejection::AlarmWithoutModel(_) => "alarm_without_model",
            TableRejection::PredictionStatusMismatch(_) => "prediction_status_mismatch",
            TableRejection::NonFinite(_) => "non_finite",
            TableRejection::EmptyName(_) => "empty_name",
        }
    }
}

impl fmt::Display for TableRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableRejection::MalformedJson(e) => write!(f, "malformed table JSON: {e}"),
            TableRejection::CameraId => f.write_str("camera id must be non-empty without whitespace"),
            TableRejection::RowCount(n) => write!(f, "expected {ROI_COUNT} rows, found {n}"),
            TableRejection::RoiIdRange(id) => write!(f, "roi id {id} outside 1..=9"),
            TableRejection::DuplicateRoi(id) => write!(f, "roi {id} appears more than once"),
            TableRejection::AlarmBitRange(id) => write!(f, "roi {id}: alarm bit must be 0 or 1"),
            TableRejection::AlarmWithoutModel(id) => write!(f, "roi {id}: alarm set without a model"),
            TableRejection::PredictionStatusMismatch(id) => {
                write!(f, "roi {id}: predicted value must be present exactly when status is ok")
            }
            TableRejection::NonFinite(id) => write!(f, "roi {id}: temperatures must be finite"),
            TableRejection::EmptyName(id) => write!(f, "roi {id}: name must be non-empty"),
        }
    }
}

impl std::error::Error for TableRejection {}

impl RoiTable {
    pub fn validate(&self) -> std::result::Result<(), TableRejection> {
        if validate_camera_id(&self.camera_id).is_err() {
            return Err(TableRejection::CameraId);
        }
        if self.rows.len() != ROI_COUNT {
            return Err(TableRejection::RowCount(self.rows.len()));
        }
        let mut seen = BTreeSet::new();
        for row in &self.rows {
            let id = row.roi_id;
            if RoiId::new(id).is_err() {
                return Err(TableRejection::RoiIdRange(id));
            }
            if !seen.insert(id) {
                return Err(TableRejection::DuplicateRoi(id));
            }
            if row.alarm_bit > 1 {
                return Err(TableRejection::AlarmBitRange(id));
            }
            if row.alarm_bit == 1 && row.model_status != ModelStatus::Ok {
                return Err(TableRejection::AlarmWithoutModel(id));
            }
            if row.predicted_c.is_some() != (row.model_status == ModelStatus::Ok) {
                return Err(TableRejection::PredictionStatusMismatch(id));
            }
            if !row.recorded_c.is_finite() || row.predicted_c.is_some_and(|p| !p.is_finite()) {
                return Err(TableRejection::NonFinite(id));
            }
            if row.name.trim().is_empty() {
                return Err(TableRejection::EmptyName(id));
            }
        }
        Ok(())
    }

    /// Sorts rows by roi id.
    pub fn normalize(&mut self) {
        self.rows.sort_by_key(|r| r.roi_id);
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("tables always serialize")
    }

    /// Parses, validates and normalizes a table.
    pub fn from_json(text: &str) -> std::result::Result<Self, TableRejection> {
        let mut table: RoiTable =
            serde_json::from_str(text).map_err(|e| TableRejection::MalformedJson(e.to_string()))?;
        table.validate()?;
        table.normalize();
        Ok(table)
    }

    pub fn alarm_count(&self) -> usize {
        self.rows.iter().filter(|r| r.alarm_bit == 1).count()
    }

    pub fn row(&self, roi: RoiId) -> Option<&RoiRow> {
        self.rows.iter().find(|r| r.roi_id == roi.get())
    }
}

/// Assembles the table from one reading and one evaluation per ROI.
pub fn build_roi_table(
    camera_id: &str,
    timestamp: Timestamp,
    entries: &[(RoiReading, Evaluation)],
    names: &BTreeMap<RoiId, String>,
) -> Result<RoiTable> {
    if entries.len() != ROI_COUNT {
        return Err(Error::invalid(format!(
            "expected {ROI_COUNT} readings, got {}",
            entries.len()
        )));
    }
    let mut rows = Vec::with_capacity(ROI_COUNT);
    let mut seen = BTreeSet::new();
    for (reading, eval) in entries {
        if !seen.insert(reading.roi_id) {
            return Err(Error::invalid(format!("duplicate reading for roi {}", reading.roi_id)));
        }
        if reading.camera_id != camera_id || reading.timestamp != timestamp {
            return Err(Error::invalid(format!(
                "reading for roi {} belongs to {} at {}",
                reading.roi_id,
                reading.camera_id,
                time::format(&reading.timestamp)
            )));
        }
        rows.push(RoiRow {
            roi_id: reading.roi_id.get(),
            name: names
                .get(&reading.roi_id)
                .cloned()
                .unwrap_or_else(|| reading.roi_id.default_name().to_string()),
            recorded_c: reading.temperature_c,
            predicted_c: eval.predicted_c,
            alarm_bit: eval.alarm_bit,
            model_status: eval.model_status,
        });
    }
    let mut table = RoiTable {
        camera_id: camera_id.to_string(),
        timestamp,
        rows,
    };
    table.normalize();
    table
        .validate()
        .map_err(|e| Error::invalid(e.to_string()))?;
    Ok(table)
}
