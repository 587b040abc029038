use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thermowatch_core::frame::ThermalFrame;
use thermowatch_core::mask::RoiId;
use thermowatch_core::time::{self, Timestamp};

use crate::anomaly::{AnomalyEffect, AnomalyScript};
use crate::camera::CameraConfig;
use crate::scene::{layout_labels, BACKGROUND};
use crate::{Result, SimError};

/// 64-bit FNV-1a, used to fold the camera id into the noise seed.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Noise stream for one (seed, camera, instant).
fn noise_rng(seed: u64, camera_id: &str, t: Timestamp) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&t.timestamp().to_le_bytes());
    key[16..24].copy_from_slice(&fnv1a(camera_id.as_bytes()).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Indices of the `n` pixels nearest to (row, col), ties by index.
fn blob_pixels(rows: usize, cols: usize, row: usize, col: usize, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rows * cols).collect();
    let dist = |i: usize| {
        let dr = (i / cols) as i64 - row as i64;
        let dc = (i % cols) as i64 - col as i64;
        dr * dr + dc * dc
    };
    let n = n.min(idx.len());
    if n < idx.len() {
        idx.select_nth_unstable_by_key(n, |&i| (dist(i), i));
        idx.truncate(n);
    }
    idx
}

/// Frame of `config` at `t`: the ROI curves, then the active anomalies in
/// script order (hot spots add, blobs overwrite), then per-pixel noise.
pub fn simulate_frame(config: &CameraConfig, script: &AnomalyScript, t: Timestamp) -> Result<ThermalFrame> {
    let scene = &config.scene;
    let (rows, cols) = (scene.rows, scene.cols);
    let labels = layout_labels(rows, cols)?;
    let tod = time::time_of_day(&t);
    let base: Vec<f64> = RoiId::all().map(|r| scene.curve(r).value_at(tod)).collect();
    let mut pixels: Vec<f64> = labels.iter().map(|&l| base[l as usize - 1]).collect();
    let background = base[BACKGROUND as usize - 1];

    for event in script.active(&config.camera_id, t) {
        match event.effect {
            AnomalyEffect::HotSpot { roi_id, magnitude_c } => {
                for (p, &l) in pixels.iter_mut().zip(&labels) {
                    if l == roi_id {
                        *p += magnitude_c;
                    }
                }
            }
            AnomalyEffect::VegetationGrowth {
                center_row,
                center_col,
                offset_c,
                ..
            } => {
                for i in blob_pixels(rows, cols, center_row, center_col, event.blob_area(t)) {
                    pixels[i] = background + offset_c;
                }
            }
            AnomalyEffect::Intruder {
                center_row,
                center_col,
                area_px,
                temperature_c,
            } => {
                for i in blob_pixels(rows, cols, center_row, center_col, area_px) {
                    pixels[i] = temperature_c;
                }
            }
        }
    }

    if scene.noise_sigma_c > 0.0 {
        let normal = Normal::new(0.0, scene.noise_sigma_c)
            .map_err(|e| SimError::Invalid(format!("noise: {e}")))?;
        let mut rng = noise_rng(scene.rng_seed, &config.camera_id, t);
        for p in &mut pixels {
            *p += normal.sample(&mut rng);
        }
    }
    Ok(ThermalFrame::new(&config.camera_id, t, rows, cols, pixels)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_is_nearest_pixels() {
        let b = blob_pixels(5, 5, 2, 2, 5);
        let mut b = b.clone();
        b.sort_unstable();
        assert_eq!(b, vec![7, 11, 12, 13, 17]);
        assert_eq!(blob_pixels(2, 2, 0, 0, 10).len(), 4);
        assert!(blob_pixels(3, 3, 1, 1, 0).is_empty());
    }

    #[test]
    fn noise_streams_differ_by_camera_and_time() {
        use rand::Rng;
        let t = time::from_unix(600);
        let a: u64 = noise_rng(1, "cam-01", t).random();
        assert_eq!(a, noise_rng(1, "cam-01", t).random::<u64>());
        assert_ne!(a, noise_rng(1, "cam-02", t).random::<u64>());
        assert_ne!(a, noise_rng(1, "cam-01", time::from_unix(660)).random::<u64>());
        assert_ne!(a, noise_rng(2, "cam-01", t).random::<u64>());
    }
}
