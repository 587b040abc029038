//! Thermal monitoring core for power transformer scenes.
//!
//! The crate covers the per-frame half of the detection pipeline:
//!
//! * [`frame`] and [`mask`] hold thermal frames and the per-camera ROI label
//!   grids, including their plain-text file formats.
//! * [`otsu`], [`components`] and [`mser`] implement automatic segmentation on
//!   the 8-bit quantized frame.
//! * [`extract`] computes the per-ROI temperature summary (mean of the hottest
//!   5% of pixels).
//! * [`segmentation`] and [`deviation`] track region sizes across frames and
//!   flag scene changes.
//! * [`predictor`], [`alarm`] and [`table`] implement the adaptive per-ROI
//!   model, alarm evaluation and the result table that gets uploaded.
//! * [`pipeline`] ties everything together for a stream of frames.

pub mod alarm;
pub mod components;
pub mod deviation;
pub mod error;
pub mod extract;
pub mod frame;
pub mod mask;
pub mod mser;
pub mod otsu;
pub mod pipeline;
pub mod predictor;
pub mod quantize;
pub mod segmentation;
pub mod table;
pub mod time;

pub use crate::alarm::{evaluate, AlarmPolicy, Evaluation, ModelStatus};
pub use crate::error::{Error, Result};
pub use crate::extract::{extract_roi_temperature, RoiReading};
pub use crate::frame::ThermalFrame;
pub use crate::mask::{RoiId, RoiMaskSet, ROI_COUNT};
pub use crate::pipeline::{Detector, DetectorConfig, FrameOutcome};
pub use crate::predictor::{fit, predict, should_retrain, Prediction, PredictionModel, Sample};
pub use crate::table::{build_roi_table, RoiRow, RoiTable, TableRejection};

