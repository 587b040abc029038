//! Threshold alarms on the gap between recorded and predicted temperature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{RoiId, ROI_COUNT};
use crate::predictor::Prediction;

pub const DEFAULT_THRESHOLD_C: f64 = 15.0;
pub const DEFAULT_COVERAGE_SECS: i64 = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelStatus {
    Ok,
    NoModel,
    ColdStart,
}

impl ModelStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelStatus::Ok => "ok",
            ModelStatus::NoModel => "no_model",
            ModelStatus::ColdStart => "cold_start",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlarmPolicy {
    thresholds_c: [f64; ROI_COUNT],
    /// Largest tolerated time-of-day gap between a target and the nearest
    /// training sample.
    pub min_model_coverage_secs: i64,
    /// When false only over-temperature raises an alarm.
    pub two_sided: bool,
}

impl Default for AlarmPolicy {
    fn default() -> Self {
        Self {
            thresholds_c: [DEFAULT_THRESHOLD_C; ROI_COUNT],
            min_model_coverage_secs: DEFAULT_COVERAGE_SECS,
            two_sided: true,
        }
    }
}

impl AlarmPolicy {
    pub fn uniform(threshold_c: f64) -> Result<Self> {
        let mut p = Self::default();
        for roi in RoiId::all() {
            p.set_threshold(roi, threshold_c)?;
        }
        Ok(p)
    }

    pub fn threshold(&self, roi: RoiId) -> f64 {
        self.thresholds_c[roi.index()]
    }

    pub fn set_threshold(&mut self, roi: RoiId, threshold_c: f64) -> Result<()> {
        if !(threshold_c > 0.0 && threshold_c.is_finite()) {
            return Err(Error::invalid(format!(
                "alarm threshold for roi {roi} must be positive, got {threshold_c}"
            )));
        }
        self.thresholds_c[roi.index()] = threshold_c;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub alarm_bit: u8,
    pub model_status: ModelStatus,
    /// Predicted value, present only when `model_status` is `Ok`.
    pub predicted_c: Option<f64>,
}

/// `prediction` is `None` while no model has ever been fit for the ROI.
pub fn evaluate(roi: RoiId, recorded_c: f64, prediction: Option<Prediction>, policy: &AlarmPolicy) -> Evaluation {
    match prediction {
        None => Evaluation {
            alarm_bit: 0,
            model_status: ModelStatus::ColdStart,
            predicted_c: None,
        },
        Some(Prediction::Unavailable) => Evaluation {
            alarm_bit: 0,
            model_status: ModelStatus::NoModel,
            predicted_c: None,
        },
        Some(Prediction::Value(predicted)) => {
            let diff = recorded_c - predicted;
            let excess = if policy.two_sided { diff.abs() } else { diff };
            Evaluation {
                alarm_bit: u8::from(excess > policy.threshold(roi)),
                model_status: ModelStatus::Ok,
                predicted_c: Some(predicted),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roi(id: u8) -> RoiId {
        RoiId::new(id).unwrap()
    }

    fn eval(recorded: f64, predicted: f64) -> Evaluation {
        evaluate(roi(1), recorded, Some(Prediction::Value(predicted)), &AlarmPolicy::default())
    }

    #[test]
    fn margin_examples() {
        assert_eq!(eval(45.0, 31.0).alarm_bit, 0);
        assert_eq!(eval(47.0, 31.0).alarm_bit, 1);
        assert_eq!(eval(47.0, 31.0).model_status, ModelStatus::Ok);
    }

    #[test]
    fn exact_margin_is_not_an_alarm() {
        assert_eq!(eval(46.0, 31.0).alarm_bit, 0);
        assert_eq!(eval(46.0 + 1e-9, 31.0).alarm_bit, 1);
        assert_eq!(eval(16.0, 31.0).alarm_bit, 0);
        assert_eq!(eval(16.0 - 1e-9, 31.0).alarm_bit, 1);
    }

    #[test]
    fn one_sided_ignores_cold_excursions() {
        let policy = AlarmPolicy { two_sided: false, ..Default::default() };
        let e = evaluate(roi(2), 10.0, Some(Prediction::Value(40.0)), &policy);
        assert_eq!(e.alarm_bit, 0);
    }

    #[test]
    fn missing_predictions() {
        let p = AlarmPolicy::default();
        let e = evaluate(roi(3), 99.0, Some(Prediction::Unavailable), &p);
        assert_eq!((e.alarm_bit, e.model_status, e.predicted_c), (0, ModelStatus::NoModel, None));
        let e = evaluate(roi(3), 99.0, None, &p);
        assert_eq!((e.alarm_bit, e.model_status), (0, ModelStatus::ColdStart));
    }

    #[test]
    fn per_roi_thresholds() {
        let mut p = AlarmPolicy::default();
        p.set_threshold(roi(5), 5.0).unwrap();
        assert!(p.set_threshold(roi(5), 0.0).is_err());
        assert!(AlarmPolicy::uniform(-1.0).is_err());
        assert_eq!(evaluate(roi(5), 37.0, Some(Prediction::Value(31.0)), &p).alarm_bit, 1);
        assert_eq!(evaluate(roi(6), 37.0, Some(Prediction::Value(31.0)), &p).alarm_bit, 0);
    }

    #[test]
    fn alarm_is_exact_comparison_on_grid() {
        let p = AlarmPolicy::uniform(15.0).unwrap();
        for r in (0..=80).map(|i| i as f64 * 0.5) {
            for q in (0..=80).map(|i| i as f64 * 0.5) {
                let e = evaluate(roi(9), r, Some(Prediction::Value(q)), &p);
                assert_eq!(e.alarm_bit == 1, (r - q).abs() > 15.0);
            }
        }
    }
}
