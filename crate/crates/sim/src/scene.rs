//! Scene geometry and per-ROI daily temperature profiles.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thermowatch_core::mask::{RoiId, RoiMaskSet, ROI_COUNT};

use crate::{Result, SimError};

/// Daily profile: an ambient sinusoid peaking mid-afternoon plus a load
/// component with a small morning shoulder and a sharp evening peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuckCurve {
    pub ambient_mean_c: f64,
    pub ambient_amplitude_c: f64,
    pub load_peak_c: f64,
    /// Hour of day (0..24) at which the load component peaks.
    pub peak_hour: f64,
}

const AMBIENT_PEAK_HOUR: f64 = 15.0;
const RISE_WIDTH_H: f64 = 3.5;
const FALL_WIDTH_H: f64 = 2.0;
const SHOULDER_OFFSET_H: f64 = 11.0;
const SHOULDER_WIDTH_H: f64 = 1.5;
const SHOULDER_SHARE: f64 = 0.35;

/// Signed hour difference `h - center` wrapped into `[-12, 12)`.
fn wrapped(h: f64, center: f64) -> f64 {
    (h - center + 12.0).rem_euclid(24.0) - 12.0
}

impl DuckCurve {
    pub const fn flat(temp_c: f64) -> Self {
        Self {
            ambient_mean_c: temp_c,
            ambient_amplitude_c: 0.0,
            load_peak_c: 0.0,
            peak_hour: 19.0,
        }
    }

    /// Temperature at `tod_secs` seconds after midnight.
    pub fn value_at(&self, tod_secs: i64) -> f64 {
        let h = tod_secs.rem_euclid(86_400) as f64 / 3600.0;
        let ambient = self.ambient_amplitude_c * (2.0 * PI * (h - AMBIENT_PEAK_HOUR) / 24.0).cos();
        let d = wrapped(h, self.peak_hour);
        let width = if d < 0.0 { RISE_WIDTH_H } else { FALL_WIDTH_H };
        let evening = (-0.5 * (d / width).powi(2)).exp();
        let m = wrapped(h, self.peak_hour - SHOULDER_OFFSET_H);
        let morning = SHOULDER_SHARE * (-0.5 * (m / SHOULDER_WIDTH_H).powi(2)).exp();
        self.ambient_mean_c + ambient + self.load_peak_c * (evening + morning)
    }

    fn validate(&self, roi: RoiId) -> Result<()> {
        let ok = [self.ambient_mean_c, self.ambient_amplitude_c, self.load_peak_c, self.peak_hour]
            .iter()
            .all(|v| v.is_finite())
            && (0.0..24.0).contains(&self.peak_hour);
        if ok {
            Ok(())
        } else {
            Err(SimError::Invalid(format!("roi {roi}: bad curve parameters {self:?}")))
        }
    }
}

/// Equipment runs hotter than the background; terminals hottest.
pub fn default_curves() -> [DuckCurve; ROI_COUNT] {
    let curve = |load_peak_c| DuckCurve {
        ambient_mean_c: 20.0,
        ambient_amplitude_c: 6.0,
        load_peak_c,
        peak_hour: 19.0,
    };
    [
        curve(28.0),
        curve(28.0),
        curve(24.0),
        curve(24.0),
        curve(20.0),
        curve(18.0),
        curve(14.0),
        curve(10.0),
        curve(0.0),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub rows: usize,
    pub cols: usize,
    pub curves: [DuckCurve; ROI_COUNT],
    pub noise_sigma_c: f64,
    pub rng_seed: u64,
}

pub const DEFAULT_ROWS: usize = 48;
pub const DEFAULT_COLS: usize = 64;

impl SceneSpec {
    pub fn new(rng_seed: u64) -> Self {
        Self {
            rows: DEFAULT_ROWS,
            cols: DEFAULT_COLS,
            curves: default_curves(),
            noise_sigma_c: 0.0,
            rng_seed,
        }
    }

    pub fn curve(&self, roi: RoiId) -> &DuckCurve {
        &self.curves[roi.index()]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma_c >= 0.0 && self.noise_sigma_c.is_finite()) {
            return Err(SimError::Invalid(format!(
                "noise_sigma_c must be finite and >= 0, got {}",
                self.noise_sigma_c
            )));
        }
        for roi in RoiId::all() {
            self.curve(roi).validate(roi)?;
        }
        layout_labels(self.rows, self.cols).map(|_| ())
    }
}

/// ROI rectangles as fractions of the frame: (roi, top, bottom, left, right).
/// Bushings stand on the body, terminals sit on top of the bushings and
/// everything else is background.
const LAYOUT: [(u8, f64, f64, f64, f64); 8] = [
    (1, 0.10, 0.20, 0.26, 0.34),
    (2, 0.10, 0.20, 0.36, 0.44),
    (3, 0.10, 0.20, 0.56, 0.64),
    (4, 0.10, 0.20, 0.66, 0.74),
    (5, 0.20, 0.50, 0.28, 0.42),
    (6, 0.20, 0.50, 0.58, 0.72),
    (7, 0.50, 0.70, 0.20, 0.80),
    (8, 0.70, 0.90, 0.20, 0.80),
];

pub const BACKGROUND: u8 = 9;

/// Row-major ROI labels of the standard scene layout.
pub fn layout_labels(rows: usize, cols: usize) -> Result<Vec<u8>> {
    let mut labels = vec![BACKGROUND; rows * cols];
    let span = |lo: f64, hi: f64, n: usize| {
        let a = (lo * n as f64).round() as usize;
        let b = ((hi * n as f64).round() as usize).min(n);
        a..b
    };
    for &(roi, top, bottom, left, right) in &LAYOUT {
        for r in span(top, bottom, rows) {
            for c in span(left, right, cols) {
                labels[r * cols + c] = roi;
            }
        }
    }
    let mut present = [false; ROI_COUNT + 1];
    for &l in &labels {
        present[l as usize] = true;
    }
    if let Some(missing) = (1..=ROI_COUNT).find(|&i| !present[i]) {
        return Err(SimError::Invalid(format!(
            "a {rows}x{cols} frame is too small for the scene layout (roi {missing} is empty)"
        )));
    }
    Ok(labels)
}

pub fn layout_masks(camera_id: &str, rows: usize, cols: usize) -> Result<RoiMaskSet> {
    let labels = layout_labels(rows, cols)?;
    Ok(RoiMaskSet::new(camera_id, rows, cols, labels, BTreeMap::new())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_curve_is_constant() {
        let c = DuckCurve::flat(30.0);
        for t in (0..86_400).step_by(977) {
            assert_eq!(c.value_at(t), 30.0);
        }
    }

    #[test]
    fn duck_curve_peaks_in_the_evening() {
        let c = DuckCurve { ambient_mean_c: 20.0, ambient_amplitude_c: 0.0, load_peak_c: 10.0, peak_hour: 19.0 };
        let hourly: Vec<f64> = (0..24).map(|h| c.value_at(h * 3600)).collect();
        let peak = (0..24).max_by(|&a, &b| hourly[a].total_cmp(&hourly[b])).unwrap();
        assert_eq!(peak, 19);
        // morning shoulder above the midday trough
        assert!(hourly[8] > hourly[13]);
        assert!((c.value_at(0) - c.value_at(86_400)).abs() < 1e-12);
    }

    #[test]
    fn layout_covers_every_roi() {
        let labels = layout_labels(DEFAULT_ROWS, DEFAULT_COLS).unwrap();
        for roi in 1..=9u8 {
            assert!(labels.contains(&roi));
        }
        assert!(layout_labels(4, 4).is_err());
        assert!(layout_masks("c", 12, 12).is_ok());
    }

    #[test]
    fn rejects_negative_noise() {
        let mut s = SceneSpec::new(1);
        s.noise_sigma_c = -0.1;
        assert!(s.validate().is_err());
    }
}
