//! Otsu's histogram threshold and the frame-level foreground segmentation
//! built on it.

use crate::components::{label_components, Component};
use crate::error::{Error, Result};
use crate::frame::ThermalFrame;
use crate::quantize::{Quantized, BINS};

/// Returns the bin `t` maximizing the between-class variance of the split
/// `{bins <= t}` / `{bins > t}`.
///
/// Candidates start at the first non-empty bin so that the lower class is
/// never empty; ties go to the smallest `t`. Class sums are accumulated in
/// integers so that splits separated only by empty bins score identically.
pub fn otsu_threshold(histogram: &[u64; BINS]) -> Result<u8> {
    let total: u128 = histogram.iter().map(|&c| u128::from(c)).sum();
    if total == 0 {
        return Err(Error::invalid("otsu threshold of an empty histogram"));
    }
    let weighted_total: u128 = histogram
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * u128::from(c))
        .sum();

    let mut below: u128 = 0;
    let mut weighted_below: u128 = 0;
    let mut best: Option<(u8, f64)> = None;
    for (t, &count) in histogram.iter().enumerate() {
        below += u128::from(count);
        weighted_below += t as u128 * u128::from(count);
        if below == 0 {
            continue;
        }
        let above = total - below;
        // n0*n1*(mu0 - mu1)^2 == (N*S0 - n0*S)^2 / (n0*n1)
        let score = if above == 0 {
            0.0
        } else {
            let diff = (total * weighted_below).abs_diff(below * weighted_total) as f64;
            diff * diff / (below as f64 * above as f64)
        };
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((t as u8, score));
        }
    }
    Ok(best.map(|(t, _)| t).expect("non-empty histogram has a first non-empty bin"))
}

/// Foreground segmentation of a frame by its Otsu threshold.
#[derive(Debug, Clone)]
pub struct OtsuSegmentation {
    /// Threshold bin on the quantized frame.
    pub threshold_bin: u8,
    /// Threshold mapped back to °C; foreground pixels are strictly hotter.
    pub threshold_c: f64,
    pub foreground: Vec<bool>,
    /// 4-connected foreground components, ordered by first pixel.
    pub components: Vec<Component>,
}

pub fn segment_otsu(frame: &ThermalFrame) -> OtsuSegmentation {
    let q = Quantized::from_frame(frame);
    segment_quantized(frame, &q)
}

pub(crate) fn segment_quantized(frame: &ThermalFrame, q: &Quantized) -> OtsuSegmentation {
    let threshold_bin = otsu_threshold(&q.histogram()).expect("frames have at least one pixel");
    let foreground: Vec<bool> = q.bins.iter().map(|&b| b > threshold_bin).collect();
    let components = label_components(&foreground, frame.rows(), frame.cols());
    OtsuSegmentation {
        threshold_bin,
        threshold_c: q.upper_edge_c(threshold_bin),
        foreground,
        components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Textbook between-class variance, recomputed from scratch for every
    /// candidate split. `None` when the lower class is empty.
    fn sigma_b(h: &[u64; BINS], t: usize) -> Option<f64> {
        let n: f64 = h.iter().map(|&c| c as f64).sum();
        let n0: f64 = h[..=t].iter().map(|&c| c as f64).sum();
        let n1 = n - n0;
        if n0 == 0.0 {
            return None;
        }
        if n1 == 0.0 {
            return Some(0.0);
        }
        let mu0 = h[..=t].iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum::<f64>() / n0;
        let mu1 = h[t + 1..]
            .iter()
            .enumerate()
            .map(|(i, &c)| (i + t + 1) as f64 * c as f64)
            .sum::<f64>()
            / n1;
        Some((n0 / n) * (n1 / n) * (mu0 - mu1).powi(2))
    }

    fn brute_force(h: &[u64; BINS]) -> u8 {
        let mut best: Option<(usize, f64)> = None;
        for t in 0..BINS {
            if let Some(s) = sigma_b(h, t) {
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((t, s));
                }
            }
        }
        best.unwrap().0 as u8
    }

    #[test]
    fn single_bin_mass() {
        let mut h = [0u64; BINS];
        h[10] = 500;
        assert_eq!(brute_force(&h), 10);
        assert_eq!(otsu_threshold(&h).unwrap(), 10);
    }

    #[test]
    fn bimodal_histogram() {
        let mut h = [0u64; BINS];
        for b in (40..=60).chain(180..=200) {
            h[b] = 100;
        }
        let expected = brute_force(&h);
        // frozen from the oracle above
        assert_eq!(expected, 60);
        assert_eq!(otsu_threshold(&h).unwrap(), expected);
    }

    #[test]
    fn empty_histogram_is_rejected() {
        assert!(matches!(otsu_threshold(&[0; BINS]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn seeded_random_histograms_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut h = [0u64; BINS];
            let sparsity = rng.random_range(0.0..0.9);
            for c in h.iter_mut() {
                if rng.random_bool(1.0 - sparsity) {
                    *c = rng.random_range(0..1000);
                }
            }
            if h.iter().all(|&c| c == 0) {
                h[rng.random_range(0..BINS)] = 1;
            }
            assert_eq!(otsu_threshold(&h).unwrap(), brute_force(&h), "{h:?}");
        }
    }

    proptest! {
        #[test]
        fn matches_oracle(cells in proptest::collection::vec((0usize..BINS, 1u64..5000), 1..40)) {
            let mut h = [0u64; BINS];
            for (b, c) in cells {
                h[b] += c;
            }
            prop_assert_eq!(otsu_threshold(&h).unwrap(), brute_force(&h));
        }
    }

    fn frame(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> ThermalFrame {
        ThermalFrame::from_fn("cam", time::from_unix(0), rows, cols, f).unwrap()
    }

    #[test]
    fn uniform_frame_has_no_foreground() {
        let seg = segment_otsu(&frame(10, 10, |_, _| 20.0));
        assert_eq!(seg.threshold_bin, 0);
        assert_eq!(seg.threshold_c, 20.0);
        assert!(seg.components.is_empty());
    }

    #[test]
    fn single_hot_block() {
        let seg = segment_otsu(&frame(10, 10, |r, c| {
            if (3..5).contains(&r) && (6..8).contains(&c) {
                80.0
            } else {
                20.0
            }
        }));
        assert_eq!(seg.components.len(), 1);
        assert_eq!(seg.components[0].area(), 4);
        assert!(seg.threshold_c >= 20.0 && seg.threshold_c < 80.0);
    }

    #[test]
    fn two_disjoint_hot_blocks() {
        let seg = segment_otsu(&frame(10, 10, |r, c| {
            if (r < 2 && c < 3) || ((6..9).contains(&r) && (5..9).contains(&c)) {
                80.0
            } else {
                20.0
            }
        }));
        let mut areas: Vec<usize> = seg.components.iter().map(Component::area).collect();
        areas.sort_unstable();
        assert_eq!(areas, vec![6, 12]);
    }

    proptest! {
        #[test]
        fn component_areas_invariant_under_affine_maps(
            values in proptest::collection::vec(-40.0f64..120.0, 64),
            scale in 0.25f64..8.0,
            offset in -100.0f64..100.0,
        ) {
            let base = ThermalFrame::new("cam", time::from_unix(0), 8, 8, values).unwrap();
            let mapped = base.map(|v| scale * v + offset).unwrap();
            let a = segment_otsu(&base);
            let b = segment_otsu(&mapped);
            let areas = |s: &OtsuSegmentation| s.components.iter().map(Component::area).collect::<Vec<_>>();
            prop_assert_eq!(areas(&a), areas(&b));
        }
    }
}
