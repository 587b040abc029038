use thermowatch_core::time::{self, Timestamp};

use crate::camera::CameraConfig;

/// Captures in `[from, until)`: each camera fires at every multiple of its
/// interval since the Unix epoch. Ordered by instant, then camera id.
pub fn next_capture_times(configs: &[CameraConfig], from: Timestamp, until: Timestamp) -> Vec<(Timestamp, String)> {
    let (from, until) = (from.timestamp(), until.timestamp());
    let mut out = Vec::new();
    for c in configs {
        let step = c.interval_secs();
        let first = from.div_euclid(step) * step + if from.rem_euclid(step) == 0 { 0 } else { step };
        let mut t = first;
        while t < until {
            out.push((time::from_unix(t), c.camera_id.clone()));
            t += step;
        }
    }
    out.sort();
    out
}

/// Number of captures of one camera in `[from, until)`.
pub fn capture_count(interval_secs: i64, from: Timestamp, until: Timestamp) -> usize {
    let (a, b) = (from.timestamp(), until.timestamp());
    if b <= a {
        return 0;
    }
    // multiples k·step with a <= k·step < b
    let first = -((-a).div_euclid(interval_secs));
    let last = (b - 1).div_euclid(interval_secs);
    usize::try_from(last - first + 1).unwrap_or(0)
}
