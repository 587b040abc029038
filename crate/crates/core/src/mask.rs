//! Per-camera ROI label grids and the `TMASK v1` text format.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{validate_camera_id, ThermalFrame};

/// Number of regions of interest tracked per camera scene.
pub const ROI_COUNT: usize = 9;

/// Identifier of a region of interest, always in `1..=9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct RoiId(u8);

impl RoiId {
    pub fn new(id: u8) -> Result<Self> {
        if (1..=ROI_COUNT as u8).contains(&id) {
            Ok(Self(id))
        } else {
            Err(Error::invalid(format!("roi id {id} outside 1..=9")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    pub fn all() -> impl Iterator<Item = RoiId> {
        (1..=ROI_COUNT as u8).map(RoiId)
    }

    /// Neutral default name for the ROI.
    pub fn default_name(self) -> &'static str {
        DEFAULT_ROI_NAMES[self.index()]
    }
}

impl TryFrom<u8> for RoiId {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        RoiId::new(v)
    }
}

impl From<RoiId> for u8 {
    fn from(id: RoiId) -> u8 {
        id.0
    }
}

impl fmt::Display for RoiId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub const DEFAULT_ROI_NAMES: [&str; ROI_COUNT] = [
    "primary-winding-terminal-1",
    "primary-winding-terminal-2",
    "secondary-winding-terminal-1",
    "secondary-winding-terminal-2",
    "high-voltage-bushing",
    "low-voltage-bushing",
    "transformer-body-upper",
    "transformer-body-lower",
    "background",
];

/// Assignment of every pixel of a camera scene to one of the nine ROIs, or to
/// none (label 0).
#[derive(Debug, Clone, PartialEq)]
pub struct RoiMaskSet {
    camera_id: String,
    rows: usize,
    cols: usize,
    labels: Vec<u8>,
    names: BTreeMap<RoiId, String>,
    members: Vec<Vec<usize>>,
}

impl RoiMaskSet {
    /// Builds a mask set. Missing names fall back to the defaults; every ROI
    /// must own at least one pixel.
    pub fn new(
        camera_id: impl Into<String>,
        rows: usize,
        cols: usize,
        labels: Vec<u8>,
        names: BTreeMap<RoiId, String>,
    ) -> Result<Self> {
        let camera_id = camera_id.into();
        validate_camera_id(&camera_id)?;
        if rows == 0 || cols == 0 || labels.len() != rows * cols {
            return Err(Error::invalid(format!(
                "mask has {} labels, expected {rows}x{cols}",
                labels.len()
            )));
        }
        let mut members = vec![Vec::new(); ROI_COUNT];
        for (i, &l) in labels.iter().enumerate() {
            match l {
                0 => {}
                1..=9 => members[usize::from(l - 1)].push(i),
                _ => return Err(Error::invalid(format!("label {l} at pixel {i} outside 0..=9"))),
            }
        }
        if let Some(missing) = members.iter().position(Vec::is_empty) {
            return Err(Error::invalid(format!(
                "mask for camera {camera_id} has no pixels for roi {}",
                missing + 1
            )));
        }
        let mut all_names = BTreeMap::new();
        for id in RoiId::all() {
            let name = names
                .get(&id)
                .cloned()
                .unwrap_or_else(|| id.default_name().to_string());
            if name.trim().is_empty() || name.contains('\n') {
                return Err(Error::invalid(format!("invalid name for roi {id}")));
            }
            all_names.insert(id, name);
        }
        Ok(Self {
            camera_id,
            rows,
            cols,
            labels,
            names: all_names,
            members,
        })
    }

    pub fn camera_id(&self) -> &str {
        &self.camera_id
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn name(&self, roi: RoiId) -> &str {
        &self.names[&roi]
    }

    pub fn names(&self) -> &BTreeMap<RoiId, String> {
        &self.names
    }

    /// Row-major pixel indices belonging to `roi`.
    pub fn pixels_of(&self, roi: RoiId) -> &[usize] {
        &self.members[roi.index()]
    }

    pub fn check_frame(&self, frame: &ThermalFrame) -> Result<()> {
        if frame.rows() != self.rows || frame.cols() != self.cols {
            return Err(Error::invalid(format!(
                "frame {}x{} does not match mask {}x{} for camera {}",
                frame.rows(),
                frame.cols(),
                self.rows,
                self.cols,
                self.camera_id
            )));
        }
        Ok(())
    }

    pub fn to_tmask(&self) -> String {
        let mut out = String::with_capacity(self.labels.len() * 2 + 256);
        let _ = writeln!(out, "TMASK v1 {} {} {}", self.camera_id, self.rows, self.cols);
        for row in self.labels.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        for (id, name) in &self.names {
            let _ = writeln!(out, "{id} {name}");
        }
        out
    }

    pub fn parse_tmask(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty mask file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "TMASK" || fields[1] != "v1" {
            return Err(Error::parse(1, "expected header `TMASK v1 <camera_id> <rows> <cols>`"));
        }
        let rows: usize = fields[3]
            .parse()
            .map_err(|_| Error::parse(1, format!("invalid row count {:?}", fields[3])))?;
        let cols: usize = fields[4]
            .parse()
            .map_err(|_| Error::parse(1, format!("invalid column count {:?}", fields[4])))?;
        if rows == 0 || cols == 0 {
            return Err(Error::parse(1, "dimensions must be positive"));
        }

        let mut labels = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (idx, line) = lines
                .next()
                .ok_or_else(|| Error::parse(1, format!("header declares {rows} rows, file is shorter")))?;
            let before = labels.len();
            for tok in line.split_whitespace() {
                let v: u8 = tok
                    .parse()
                    .ok()
                    .filter(|v| *v <= 9)
                    .ok_or_else(|| Error::parse(idx + 1, format!("invalid label {tok:?}")))?;
                labels.push(v);
            }
            if labels.len() - before != cols {
                return Err(Error::parse(
                    idx + 1,
                    format!("expected {cols} labels, found {}", labels.len() - before),
                ));
            }
        }

        let mut names = BTreeMap::new();
        for (idx, line) in lines {
            let line = line.trim();
            let (id, name) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::parse(idx + 1, "expected `<roi_id> <name>`"))?;
            let id = id
                .parse::<u8>()
                .ok()
                .and_then(|v| RoiId::new(v).ok())
                .ok_or_else(|| Error::parse(idx + 1, format!("invalid roi id {id:?}")))?;
            if names.insert(id, name.trim().to_string()).is_some() {
                return Err(Error::parse(idx + 1, format!("roi {id} named twice")));
            }
        }
        if names.len() != ROI_COUNT {
            return Err(Error::parse(
                rows + 2,
                format!("expected {ROI_COUNT} roi names, found {}", names.len()),
            ));
        }
        Self::new(fields[2], rows, cols, labels, names).map_err(|e| Error::parse(1, e.to_string()))
    }
}
