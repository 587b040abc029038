//! Adaptive per-(camera, ROI) temperature model.
//!
//! The model is a time-of-day curve built from the latest 24 hours of
//! readings. On every retrain the new window is blended with the previous
//! curve, `new = alpha * window + (1 - alpha) * previous`, so the curve tracks
//! the daily load profile while smoothing day-to-day noise. Predictions look
//! up the curve at the target's time of day and are only served for the 12
//! hours following the last retrain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::RoiId;
use crate::time::{self, Timestamp, SECONDS_PER_DAY};

pub const RETRAIN_INTERVAL_SECS: i64 = 720 * 60;
pub const TRAINING_WINDOW_SECS: i64 = 24 * 3600;
pub const PREDICTION_HORIZON_SECS: i64 = 12 * 3600;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    #[serde(with = "time::serde_secs")]
    pub timestamp: Timestamp,
    pub temperature_c: f64,
}

impl Sample {
    pub fn new(timestamp: Timestamp, temperature_c: f64) -> Self {
        Self {
            timestamp,
            temperature_c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Seconds since midnight UTC.
    pub tod_secs: i64,
    pub temperature_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    pub smoothing_alpha: f64,
    /// Largest time-of-day distance to the nearest curve point at which the
    /// curve is still considered to cover a target.
    pub coverage_secs: i64,
}

impl Default for FitParams {
    fn default() -> Self {
        Self {
            smoothing_alpha: 0.5,
            coverage_secs: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionModel {
    pub camera_id: String,
    pub roi_id: RoiId,
    #[serde(with = "time::serde_secs")]
    pub trained_at: Timestamp,
    /// Samples in `(trained_at - 24h, trained_at]`, strictly increasing.
    pub training_window: Vec<Sample>,
    /// Blended curve, sorted by time of day.
    pub curve: Vec<CurvePoint>,
    pub smoothing_alpha: f64,
    pub version: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prediction {
    Value(f64),
    /// The curve has no point close enough to the target's time of day.
    Unavailable,
}

impl Prediction {
    pub fn value(self) -> Option<f64> {
        match self {
            Prediction::Value(v) => Some(v),
            Prediction::Unavailable => None,
        }
    }
}

/// Restricts `history` to `(now - 24h, now]`, sorted, one sample per instant
/// (the last one wins).
pub fn training_window(history: &[Sample], now: Timestamp) -> Vec<Sample> {
    let start = now.timestamp() - TRAINING_WINDOW_SECS;
    let mut window: Vec<Sample> = history
        .iter()
        .filter(|s| s.timestamp.timestamp() > start && s.timestamp <= now)
        .copied()
        .collect();
    window.sort_by_key(|s| s.timestamp);
    let mut deduped: Vec<Sample> = Vec::with_capacity(window.len());
    for s in window {
        match deduped.last_mut() {
            Some(last) if last.timestamp == s.timestamp => *last = s,
            _ => deduped.push(s),
        }
    }
    deduped
}

/// Fits a model on the latest 24 hours of `history`. Returns `None` when the
/// window is empty.
pub fn fit(
    camera_id: &str,
    roi_id: RoiId,
    history: &[Sample],
    now: Timestamp,
    previous: Option<&PredictionModel>,
    params: &FitParams,
) -> Result<Option<PredictionModel>> {
    if !(0.0..=1.0).contains(&params.smoothing_alpha) {
        return Err(Error::invalid(format!(
            "smoothing alpha {} outside [0, 1]",
            params.smoothing_alpha
        )));
    }
    let window = training_window(history, now);
    if window.is_empty() {
        return Ok(None);
    }
    let alpha = params.smoothing_alpha;
    let mut curve: Vec<CurvePoint> = window
        .iter()
        .map(|s| {
            let tod = time::time_of_day(&s.timestamp);
            let blended = match previous.and_then(|p| curve_value(&p.curve, tod, params.coverage_secs)) {
                Some(prev) => alpha * s.temperature_c + (1.0 - alpha) * prev,
                None => s.temperature_c,
            };
            CurvePoint {
                tod_secs: tod,
                temperature_c: blended,
            }
        })
        .collect();
    curve.sort_by_key(|p| p.tod_secs);
    Ok(Some(PredictionModel {
        camera_id: camera_id.to_string(),
        roi_id,
        trained_at: now,
        training_window: window,
        curve,
        smoothing_alpha: alpha,
        version: previous.map_or(1, |p| p.version + 1),
    }))
}

/// Curve value at `tod`, linearly interpolated between the neighbouring
/// points on the 24 h circle. `None` when the nearest point is farther than
/// `coverage_secs`.
pub fn curve_value(curve: &[CurvePoint], tod: i64, coverage_secs: i64) -> Option<f64> {
    if curve.is_empty() {
        return None;
    }
    let tod = tod.rem_euclid(SECONDS_PER_DAY);
    let idx = curve.partition_point(|p| p.tod_secs < tod);
    if let Some(p) = curve.get(idx).filter(|p| p.tod_secs == tod) {
        return Some(p.temperature_c);
    }
    let next = &curve[idx % curve.len()];
    let prev = &curve[(idx + curve.len() - 1) % curve.len()];
    let to_prev = (tod - prev.tod_secs).rem_euclid(SECONDS_PER_DAY);
    let to_next = (next.tod_secs - tod).rem_euclid(SECONDS_PER_DAY);
    if to_prev.min(to_next) > coverage_secs {
        return None;
    }
    if curve.len() == 1 {
        return Some(prev.temperature_c);
    }
    let w = to_prev as f64 / (to_prev + to_next) as f64;
    Some(prev.temperature_c + (next.temperature_c - prev.temperature_c) * w)
}

/// Expected temperature at `target`, which must fall within
/// `(trained_at, trained_at + 12h]`.
pub fn predict(model: &PredictionModel, target: Timestamp, coverage_secs: i64) -> Result<Prediction> {
    let offset = target.timestamp() - model.trained_at.timestamp();
    if offset <= 0 || offset > PREDICTION_HORIZON_SECS {
        return Err(Error::OutOfHorizon {
            trained_at: time::format(&model.trained_at),
            target: time::format(&target),
        });
    }
    Ok(
        match curve_value(&model.curve, time::time_of_day(&target), coverage_secs) {
            Some(v) => Prediction::Value(v),
            None => Prediction::Unavailable,
        },
    )
}

/// True when no model exists yet (and there is data to fit) or the current
/// model is at least 720 minutes old.
pub fn should_retrain(model: Option<&PredictionModel>, has_samples: bool, now: Timestamp) -> bool {
    match model {
        None => has_samples,
        Some(m) => now.timestamp() - m.trained_at.timestamp() >= RETRAIN_INTERVAL_SECS,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const T0: i64 = 1_717_200_000; // 2024-06-01T00:00:00Z

    fn at(secs: i64) -> Timestamp {
        time::from_unix(T0 + secs)
    }

    fn roi() -> RoiId {
        RoiId::new(4).unwrap()
    }

    fn series(from: i64, to: i64, step: i64, f: impl Fn(i64) -> f64) -> Vec<Sample> {
        (from..to).step_by(step as usize).map(|s| Sample::new(at(s), f(s))).collect()
    }

    fn fit_once(history: &[Sample], now: i64, prev: Option<&PredictionModel>) -> PredictionModel {
        fit("cam", roi(), history, at(now), prev, &FitParams::default()).unwrap().unwrap()
    }

    #[test]
    fn first_fit_keeps_raw_window() {
        let h = series(0, 3600, 60, |s| 20.0 + s as f64 / 600.0);
        let m = fit_once(&h, 3540, None);
        assert_eq!(m.version, 1);
        assert_eq!(m.training_window, h);
        let raw: Vec<f64> = h.iter().map(|s| s.temperature_c).collect();
        let curve: Vec<f64> = m.curve.iter().map(|p| p.temperature_c).collect();
        assert_eq!(curve, raw);
    }

    #[test]
    fn empty_history_gives_no_model() {
        assert!(fit("cam", roi(), &[], at(0), None, &FitParams::default()).unwrap().is_none());
        // samples outside the window count as empty
        let old = series(0, 600, 60, |_| 20.0);
        assert!(fit("cam", roi(), &old, at(2 * 86_400), None, &FitParams::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn window_is_half_open_24h() {
        let h = series(0, 2 * 86_400 + 60, 3600, |_| 20.0);
        let m = fit_once(&h, 2 * 86_400, None);
        let first = m.training_window.first().unwrap().timestamp.timestamp() - T0;
        assert_eq!(first, 86_400 + 3600);
        assert_eq!(m.training_window.len(), 24);
    }

    #[test]
    fn identical_refit_is_fixed_point() {
        let h = series(0, 86_400, 300, |s| 30.0 + (s as f64 / 9000.0).sin());
        let m1 = fit_once(&h, 86_100, None);
        let m2 = fit_once(&h, 86_100, Some(&m1));
        assert_eq!(m2.version, 2);
        for (a, b) in m1.curve.iter().zip(&m2.curve) {
            assert!((a.temperature_c - b.temperature_c).abs() < 1e-12);
        }
    }

    #[test]
    fn blending_constant_curves() {
        let day1 = series(0, 86_400, 300, |_| 30.0);
        let m1 = fit_once(&day1, 86_100, None);
        let day2 = series(86_400, 2 * 86_400, 300, |_| 40.0);
        let m2 = fit_once(&day2, 2 * 86_400 - 300, Some(&m1));
        assert!(m2.curve.iter().all(|p| p.temperature_c == 35.0));
    }

    #[test]
    fn blending_contracts_geometrically() {
        let h = series(0, 86_400, 600, |s| 25.0 + 10.0 * ((s % 7200) as f64 / 7200.0));
        let mut prev = fit_once(&series(0, 86_400, 600, |_| 0.0), 86_400 - 600, None);
        let initial_gap = 35.0;
        for n in 1..=20 {
            let m = fit_once(&h, 86_400 - 600, Some(&prev));
            let gap = m
                .curve
                .iter()
                .zip(&h)
                .map(|(p, s)| (p.temperature_c - s.temperature_c).abs())
                .fold(0.0, f64::max);
            assert!(gap <= initial_gap * 0.5f64.powi(n) + 1e-9, "n={n} gap={gap}");
            prev = m;
        }
    }

    #[test]
    fn rejects_bad_alpha() {
        let params = FitParams { smoothing_alpha: 1.5, ..Default::default() };
        assert!(fit("cam", roi(), &[], at(0), None, &params).is_err());
    }

    #[test]
    fn interpolates_between_neighbours() {
        let noon = 12 * 3600;
        let h = vec![Sample::new(at(noon), 30.0), Sample::new(at(noon + 600), 40.0)];
        let m = fit_once(&h, noon + 600, None);
        let target = at(86_400 + noon + 300);
        let m = PredictionModel { trained_at: at(86_400 + 6 * 3600), ..m };
        assert_eq!(predict(&m, target, 600).unwrap(), Prediction::Value(35.0));
    }

    #[test]
    fn coverage_gap_makes_prediction_unavailable() {
        let h = vec![Sample::new(at(3600), 30.0)];
        let m = fit_once(&h, 3600, None);
        assert_eq!(predict(&m, at(3600 + 25 * 60), 600).unwrap(), Prediction::Unavailable);
        assert_eq!(predict(&m, at(3600 + 10 * 60), 600).unwrap(), Prediction::Value(30.0));
    }

    #[test]
    fn wraps_around_midnight() {
        let curve = vec![
            CurvePoint { tod_secs: 60, temperature_c: 10.0 },
            CurvePoint { tod_secs: 86_340, temperature_c: 20.0 },
        ];
        assert_eq!(curve_value(&curve, 0, 600), Some(15.0));
        assert_eq!(curve_value(&curve, 86_370, 600), Some(17.5));
    }

    #[test]
    fn horizon_is_enforced() {
        let h = series(0, 3600, 60, |_| 30.0);
        let m = fit_once(&h, 3540, None);
        assert!(matches!(predict(&m, at(3540), 600), Err(Error::OutOfHorizon { .. })));
        assert!(predict(&m, at(3540 + PREDICTION_HORIZON_SECS), 600).is_ok());
        assert!(matches!(
            predict(&m, at(3541 + PREDICTION_HORIZON_SECS), 600),
            Err(Error::OutOfHorizon { .. })
        ));
    }

    #[test]
    fn persistence_on_periodic_signal() {
        let f = |s: i64| 30.0 + 8.0 * (2.0 * std::f64::consts::PI * s as f64 / 86_400.0).sin();
        let h = series(0, 86_400, 60, f);
        let m = fit_once(&h, 86_340, None);
        for s in (86_400..86_340 + PREDICTION_HORIZON_SECS).step_by(60) {
            assert_eq!(predict(&m, at(s), 600).unwrap(), Prediction::Value(f(s - 86_400)));
        }
    }

    #[test]
    fn retrain_schedule() {
        let h = series(0, 60, 60, |_| 30.0);
        let m = fit_once(&h, 0, None);
        assert!(should_retrain(None, true, at(0)));
        assert!(!should_retrain(None, false, at(0)));
        assert!(!should_retrain(Some(&m), true, at(719 * 60)));
        assert!(should_retrain(Some(&m), true, at(720 * 60)));
    }

    proptest! {
        #[test]
        fn periodic_fidelity_within_interpolation_error(
            amp in 0.0f64..20.0,
            phase in 0.0f64..std::f64::consts::TAU,
            step in prop::sample::select(vec![60i64, 300]),
            offset in 0i64..86_400,
        ) {
            let f = |s: i64| 40.0 + amp * (2.0 * std::f64::consts::PI * s as f64 / 86_400.0 + phase).sin();
            let h = series(offset, offset + 86_400, step, f);
            let trained = offset + 86_400 - step;
            let m = fit_once(&h, trained, None);
            // |f'| <= amp * 2pi / 86400
            let bound = amp * 2.0 * std::f64::consts::PI / 86_400.0 * step as f64 / 2.0 + 1e-9;
            for s in (trained + 1..=trained + PREDICTION_HORIZON_SECS).step_by(97) {
                let p = predict(&m, at(s), 600).unwrap().value().unwrap();
                prop_assert!((p - f(s)).abs() <= bound, "s={} p={} f={}", s, p, f(s));
            }
        }
    }
}
