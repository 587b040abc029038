//! Per-ROI temperature summary: mean of the hottest 5% of the ROI's pixels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::ThermalFrame;
use crate::mask::{RoiId, RoiMaskSet};
use crate::time::{self, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiReading {
    pub camera_id: String,
    #[serde(with = "time::serde_secs")]
    pub timestamp: Timestamp,
    pub roi_id: RoiId,
    pub temperature_c: f64,
    pub pixel_count: usize,
}

/// Number of pixels averaged for an ROI of `n` pixels: `ceil(n / 20)`.
pub fn top_count(n: usize) -> usize {
    n.div_ceil(20)
}

/// Mean of the `top_count(values.len())` largest values. Reorders `values`.
///
/// The result is clamped to the range of the selected values, so it never
/// leaves `[min, max]` of the input through rounding.
pub fn top_fraction_mean(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let k = top_count(values.len());
    let split = values.len() - k;
    if split > 0 {
        values.select_nth_unstable_by(split, f64::total_cmp);
    }
    // summing the selection in ascending order keeps the result exactly
    // monotone in every input value
    let top = &mut values[split..];
    top.sort_unstable_by(f64::total_cmp);
    let (lo, hi) = top
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean = top.iter().sum::<f64>() / k as f64;
    Some(mean.clamp(lo, hi))
}

pub fn extract_roi_temperature(frame: &ThermalFrame, masks: &RoiMaskSet, roi: RoiId) -> Result<RoiReading> {
    masks.check_frame(frame)?;
    if masks.camera_id() != frame.camera_id() {
        return Err(Error::invalid(format!(
            "mask for camera {} applied to frame from camera {}",
            masks.camera_id(),
            frame.camera_id()
        )));
    }
    let pixels = frame.pixels();
    let mut values: Vec<f64> = masks.pixels_of(roi).iter().map(|&i| pixels[i]).collect();
    let pixel_count = values.len();
    let temperature_c = top_fraction_mean(&mut values).expect("mask sets never have empty rois");
    Ok(RoiReading {
        camera_id: frame.camera_id().to_string(),
        timestamp: frame.timestamp(),
        roi_id: roi,
        temperature_c,
        pixel_count,
    })
}

/// Readings for all nine ROIs, ordered by roi id.
pub fn extract_all(frame: &ThermalFrame, masks: &RoiMaskSet) -> Result<Vec<RoiReading>> {
    RoiId::all().map(|roi| extract_roi_temperature(frame, masks, roi)).collect()
}
