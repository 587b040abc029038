//! Thermal frames and the `TFRAME v1` text format.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::time::{self, Timestamp};

/// A timestamped grid of temperatures in °C from one camera, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalFrame {
    camera_id: String,
    timestamp: Timestamp,
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
}

pub(crate) fn validate_camera_id(id: &str) -> Result<()> {
    if id.is_empty() || id.chars().any(char::is_whitespace) {
        return Err(Error::invalid(format!(
            "camera id {id:?} must be non-empty and contain no whitespace"
        )));
    }
    Ok(())
}

impl ThermalFrame {
    pub fn new(
        camera_id: impl Into<String>,
        timestamp: Timestamp,
        rows: usize,
        cols: usize,
        pixels: Vec<f64>,
    ) -> Result<Self> {
        let camera_id = camera_id.into();
        validate_camera_id(&camera_id)?;
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("frame dimensions {rows}x{cols} must be positive")));
        }
        if pixels.len() != rows * cols {
            return Err(Error::invalid(format!(
                "frame has {} pixels, expected {rows}x{cols} = {}",
                pixels.len(),
                rows * cols
            )));
        }
        if let Some(i) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("pixel {i} is not finite")));
        }
        Ok(Self {
            camera_id,
            timestamp,
            rows,
            cols,
            pixels,
        })
    }

    /// Builds a frame by evaluating `f(row, col)` for every pixel.
    pub fn from_fn(
        camera_id: impl Into<String>,
        timestamp: Timestamp,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                pixels.push(f(r, c));
            }
        }
        Self::new(camera_id, timestamp, rows, cols, pixels)
    }

    pub fn camera_id(&self) -> &str {
        &self.camera_id
    }

    pub fn timestamp(&self) -> Timestamp {
        self.timestamp
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.cols + col]
    }

    /// Applies `f` to every pixel, keeping identity and geometry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.camera_id.clone(),
            self.timestamp,
            self.rows,
            self.cols,
            self.pixels.iter().map(|&v| f(v)).collect(),
        )
    }

    /// `(min, max)` pixel temperature.
    pub fn range(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Serializes to `TFRAME v1`. `precision` fixes the number of decimals;
    /// `None` writes the shortest representation that parses back exactly.
    pub fn to_tframe(&self, precision: Option<usize>) -> String {
        let mut out = String::with_capacity(self.pixels.len() * 8 + 64);
        let _ = writeln!(
            out,
            "TFRAME v1 {} {} {} {}",
            self.camera_id,
            time::format(&self.timestamp),
            self.rows,
            self.cols
        );
        for row in self.pixels.chunks(self.cols) {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = match precision {
                    Some(p) => write!(out, "{v:.p$}"),
                    None => write!(out, "{v}"),
                };
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_tframe(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty frame file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "TFRAME" || fields[1] != "v1" {
            return Err(Error::parse(
                1,
                "expected header `TFRAME v1 <camera_id> <timestamp> <rows> <cols>`",
            ));
        }
        let timestamp = time::parse(fields[3])
            .ok_or_else(|| Error::parse(1, format!("invalid timestamp {:?}", fields[3])))?;
        let rows: usize = fields[4]
            .parse()
            .map_err(|_| Error::parse(1, format!("invalid row count {:?}", fields[4])))?;
        let cols: usize = fields[5]
            .parse()
            .map_err(|_| Error::parse(1, format!("invalid column count {:?}", fields[5])))?;
        if rows == 0 || cols == 0 {
            return Err(Error::parse(1, "dimensions must be positive"));
        }

        let mut pixels = Vec::with_capacity(rows * cols);
        let mut seen_rows = 0;
        for (idx, line) in lines {
            let lineno = idx + 1;
            seen_rows += 1;
            if seen_rows > rows {
                return Err(Error::parse(lineno, format!("more than {rows} data rows")));
            }
            let before = pixels.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("invalid temperature {tok:?}")))?;
                if !v.is_finite() {
                    return Err(Error::parse(lineno, format!("non-finite temperature {tok:?}")));
                }
                pixels.push(v);
            }
            if pixels.len() - before != cols {
                return Err(Error::parse(
                    lineno,
                    format!("expected {cols} values, found {}", pixels.len() - before),
                ));
            }
        }
        if seen_rows != rows {
            return Err(Error::parse(
                1,
                format!("header declares {rows} rows, file has {seen_rows}"),
            ));
        }
        Self::new(fields[2], timestamp, rows, cols, pixels).map_err(|e| Error::parse(1, e.to_string()))
    }
}
