//! Per-camera detection state machine.
//!
//! For every frame: extract the nine ROI readings, predict each with the
//! current model and evaluate the alarm, append the readings to the 24 h
//! history, then retrain any model that is due. Predicting before retraining
//! keeps the frame that triggers a retrain inside the old model's horizon;
//! the new model then covers the next 12 hours.

use std::collections::{BTreeMap, VecDeque};

use crate::alarm::{evaluate, AlarmPolicy, Evaluation};
use crate::deviation::{apply_to_report, DeviationConfig, SizeBaseline};
use crate::error::{Error, Result};
use crate::extract::extract_all;
use crate::frame::ThermalFrame;
use crate::mask::{RoiId, RoiMaskSet, ROI_COUNT};
use crate::predictor::{self, FitParams, PredictionModel, Sample, TRAINING_WINDOW_SECS};
use crate::segmentation::{analyze, SegmentationConfig, SegmentationReport};
use crate::table::{build_roi_table, RoiTable};
use crate::time::{self, Timestamp};

#[derive(Debug, Clone, Default)]
pub struct DetectorConfig {
    pub policy: AlarmPolicy,
    pub fit: FitParams,
    /// Segmentation and size tracking run only when set.
    pub segmentation: Option<(SegmentationConfig, DeviationConfig)>,
}

#[derive(Debug, Clone)]
pub struct FrameOutcome {
    pub table: RoiTable,
    pub segmentation: Option<SegmentationReport>,
    /// ROIs whose model was refit after this frame.
    pub retrained: Vec<RoiId>,
}

#[derive(Debug, Default)]
struct RoiState {
    history: VecDeque<Sample>,
    model: Option<PredictionModel>,
}

#[derive(Debug)]
struct CameraState {
    masks: RoiMaskSet,
    last: Option<Timestamp>,
    rois: Vec<RoiState>,
    baseline: SizeBaseline,
}

#[derive(Debug, Default)]
pub struct Detector {
    config: DetectorConfig,
    cameras: BTreeMap<String, CameraState>,
}

impl Detector {
    pub fn new(config: DetectorConfig) -> Result<Self> {
        if !(0.0..=1.0).contains(&config.fit.smoothing_alpha) {
            return Err(Error::invalid("smoothing alpha outside [0, 1]"));
        }
        if let Some((seg, _)) = &config.segmentation {
            seg.mser.validate()?;
        }
        Ok(Self {
            config,
            cameras: BTreeMap::new(),
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn add_camera(&mut self, masks: RoiMaskSet) -> Result<()> {
        let id = masks.camera_id().to_string();
        if self.cameras.contains_key(&id) {
            return Err(Error::invalid(format!("camera {id} registered twice")));
        }
        self.cameras.insert(
            id,
            CameraState {
                masks,
                last: None,
                rois: (0..ROI_COUNT).map(|_| RoiState::default()).collect(),
                baseline: SizeBaseline::new(),
            },
        );
        Ok(())
    }

    pub fn has_camera(&self, camera_id: &str) -> bool {
        self.cameras.contains_key(camera_id)
    }

    pub fn model(&self, camera_id: &str, roi: RoiId) -> Option<&PredictionModel> {
        self.cameras.get(camera_id)?.rois[roi.index()].model.as_ref()
    }

    pub fn process(&mut self, frame: &ThermalFrame) -> Result<FrameOutcome> {
        let config = &self.config;
        let cam = self
            .cameras
            .get_mut(frame.camera_id())
            .ok_or_else(|| Error::invalid(format!("no masks for camera {}", frame.camera_id())))?;
        let now = frame.timestamp();
        if let Some(last) = cam.last {
            if now <= last {
                return Err(Error::invalid(format!(
                    "camera {}: frame at {} does not follow {}",
                    frame.camera_id(),
                    time::format(&now),
                    time::format(&last)
                )));
            }
        }
        let readings = extract_all(frame, &cam.masks)?;

        let segmentation = match &config.segmentation {
            Some((seg, dev)) => {
                let mut report = analyze(frame, seg)?;
                apply_to_report(&mut report, &mut cam.baseline, dev);
                Some(report)
            }
            None => None,
        };

        let mut entries = Vec::with_capacity(ROI_COUNT);
        for reading in readings {
            let state = &cam.rois[reading.roi_id.index()];
            let prediction = state.model.as_ref().map(|m| {
                // a model past its horizon cannot speak for this frame
                predictor::predict(m, now, config.policy.min_model_coverage_secs)
                    .unwrap_or(predictor::Prediction::Unavailable)
            });
            let eval: Evaluation = evaluate(reading.roi_id, reading.temperature_c, prediction, &config.policy);
            entries.push((reading, eval));
        }
        let table = build_roi_table(frame.camera_id(), now, &entries, cam.masks.names())?;

        let mut retrained = Vec::new();
        for (reading, _) in &entries {
            let state = &mut cam.rois[reading.roi_id.index()];
            state.history.push_back(Sample::new(now, reading.temperature_c));
            while state
                .history
                .front()
                .is_some_and(|s| now.timestamp() - s.timestamp.timestamp() >= TRAINING_WINDOW_SECS)
            {
                state.history.pop_front();
            }
            if predictor::should_retrain(state.model.as_ref(), !state.history.is_empty(), now) {
                let history = state.history.make_contiguous();
                if let Some(model) = predictor::fit(
                    frame.camera_id(),
                    reading.roi_id,
                    history,
                    now,
                    state.model.as_ref(),
                    &config.fit,
                )? {
                    state.model = Some(model);
                    retrained.push(reading.roi_id);
                }
            }
        }
        cam.last = Some(now);
        Ok(FrameOutcome {
            table,
            segmentation,
            retrained,
        })
    }
}
