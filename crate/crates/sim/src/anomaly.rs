//! Scripted scene anomalies.

use serde::{Deserialize, Serialize};
use thermowatch_core::mask::RoiId;
use thermowatch_core::time::{self, Timestamp};

use crate::camera::CameraConfig;
use crate::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnomalyEffect {
    /// Adds `magnitude_c` to every pixel of one ROI.
    HotSpot { roi_id: u8, magnitude_c: f64 },
    /// A cool blob that covers `initial_area_px + growth_px_per_min·minutes`
    /// pixels nearest to the center, at background temperature plus `offset_c`.
    VegetationGrowth {
        center_row: usize,
        center_col: usize,
        growth_px_per_min: f64,
        #[serde(default)]
        initial_area_px: usize,
        #[serde(default)]
        offset_c: f64,
    },
    /// A warm blob of fixed size and temperature.
    Intruder {
        center_row: usize,
        center_col: usize,
        area_px: usize,
        temperature_c: f64,
    },
}

/// Active on `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyEvent {
    pub camera_id: String,
    #[serde(with = "time::serde_secs")]
    pub start: Timestamp,
    #[serde(with = "time::serde_secs")]
    pub end: Timestamp,
    #[serde(flatten)]
    pub effect: AnomalyEffect,
}

impl AnomalyEvent {
    pub fn is_active(&self, t: Timestamp) -> bool {
        self.start <= t && t < self.end
    }

    /// Blob size at `t`; zero for hot spots.
    pub fn blob_area(&self, t: Timestamp) -> usize {
        match self.effect {
            AnomalyEffect::HotSpot { .. } => 0,
            AnomalyEffect::VegetationGrowth {
                growth_px_per_min,
                initial_area_px,
                ..
            } => {
                let minutes = (t - self.start).num_seconds() as f64 / 60.0;
                initial_area_px + (growth_px_per_min * minutes).floor() as usize
            }
            AnomalyEffect::Intruder { area_px, .. } => area_px,
        }
    }

    pub fn validate(&self, camera: &CameraConfig) -> Result<()> {
        let fail = |msg: String| Err(SimError::Invalid(format!("anomaly on {}: {msg}", self.camera_id)));
        if self.start >= self.end {
            return fail("start must precede end".into());
        }
        let (rows, cols) = (camera.scene.rows, camera.scene.cols);
        match self.effect {
            AnomalyEffect::HotSpot { roi_id, magnitude_c } => {
                if RoiId::new(roi_id).is_err() {
                    return fail(format!("roi_id {roi_id} outside 1..=9"));
                }
                if !magnitude_c.is_finite() {
                    return fail("magnitude_c must be finite".into());
                }
            }
            AnomalyEffect::VegetationGrowth {
                center_row,
                center_col,
                growth_px_per_min,
                offset_c,
                ..
            } => {
                if center_row >= rows || center_col >= cols {
                    return fail("blob center outside the frame".into());
                }
                if !(growth_px_per_min >= 0.0 && growth_px_per_min.is_finite()) || !offset_c.is_finite() {
                    return fail("growth rate must be finite and >= 0".into());
                }
            }
            AnomalyEffect::Intruder {
                center_row,
                center_col,
                area_px,
                temperature_c,
            } => {
                if center_row >= rows || center_col >= cols {
                    return fail("blob center outside the frame".into());
                }
                if area_px == 0 || !temperature_c.is_finite() {
                    return fail("intruder needs a positive area and finite temperature".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnomalyScript {
    pub events: Vec<AnomalyEvent>,
}

impl AnomalyScript {
    pub fn new(events: Vec<AnomalyEvent>) -> Self {
        Self { events }
    }

    /// Events for `camera_id` active at `t`, in script order.
    pub fn active<'a>(&'a self, camera_id: &'a str, t: Timestamp) -> impl Iterator<Item = &'a AnomalyEvent> + 'a {
        self.events
            .iter()
            .filter(move |e| e.camera_id == camera_id && e.is_active(t))
    }

    pub fn validate(&self, cameras: &[CameraConfig]) -> Result<()> {
        for e in &self.events {
            let camera = cameras
                .iter()
                .find(|c| c.camera_id == e.camera_id)
                .ok_or_else(|| SimError::Invalid(format!("anomaly references unknown camera {}", e.camera_id)))?;
            e.validate(camera)?;
        }
        Ok(())
    }
}
