//! Region-size tracking across frames of one camera.
//!
//! Each tracked region keeps an exponential moving average of its area.
//! Regions are matched frame to frame by bounding-box overlap; a region is
//! flagged when its area departs from the average by more than `rel_tol`, or
//! when it has no counterpart (appeared or disappeared).

use serde::{Deserialize, Serialize};

use crate::segmentation::{BoundingBox, Region, SegmentationReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationConfig {
    pub rel_tol: f64,
    pub ema_factor: f64,
}

impl Default for DeviationConfig {
    fn default() -> Self {
        Self {
            rel_tol: 0.20,
            ema_factor: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub track_id: u32,
    pub bbox: BoundingBox,
    pub area_ema: f64,
}

/// Per-camera baseline. Callers must serialize updates for a camera.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SizeBaseline {
    tracks: Vec<Track>,
    next_id: u32,
}

impl SizeBaseline {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Seeds a track directly, e.g. from a stored baseline.
    pub fn insert(&mut self, bbox: BoundingBox, area: f64) -> u32 {
        self.next_id += 1;
        self.tracks.push(Track {
            track_id: self.next_id,
            bbox,
            area_ema: area,
        });
        self.next_id
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeviationOutcome {
    /// One flag per current region.
    pub flags: Vec<bool>,
    /// Track assigned to each current region.
    pub track_ids: Vec<u32>,
    /// Tracks with no current counterpart; removed from the baseline.
    pub disappeared: Vec<u32>,
}

pub fn relative_deviation(area: f64, baseline: f64) -> f64 {
    (area - baseline).abs() / baseline.max(1.0)
}

pub fn detect_size_deviation(
    current: &[Region],
    baseline: &mut SizeBaseline,
    config: &DeviationConfig,
) -> DeviationOutcome {
    // candidate pairs: (iou, overlap area, region index, track index)
    let mut pairs = Vec::new();
    for (ri, region) in current.iter().enumerate() {
        for (ti, track) in baseline.tracks.iter().enumerate() {
            let overlap = region.bbox.intersection_area(&track.bbox);
            if overlap > 0 {
                pairs.push((region.bbox.iou(&track.bbox), overlap, ri, ti));
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(current[a.2].region_id.cmp(&current[b.2].region_id))
            .then(baseline.tracks[a.3].track_id.cmp(&baseline.tracks[b.3].track_id))
    });

    let mut region_track: Vec<Option<usize>> = vec![None; current.len()];
    let mut track_taken = vec![false; baseline.tracks.len()];
    for (_, _, ri, ti) in pairs {
        if region_track[ri].is_none() && !track_taken[ti] {
            region_track[ri] = Some(ti);
            track_taken[ti] = true;
        }
    }

    let mut outcome = DeviationOutcome::default();
    let mut kept = Vec::with_capacity(current.len());
    for (ri, region) in current.iter().enumerate() {
        let area = region.pixel_area as f64;
        match region_track[ri] {
            Some(ti) => {
                let mut track = baseline.tracks[ti].clone();
                outcome
                    .flags
                    .push(relative_deviation(area, track.area_ema) > config.rel_tol);
                track.area_ema = (1.0 - config.ema_factor) * track.area_ema + config.ema_factor * area;
                track.bbox = region.bbox;
                outcome.track_ids.push(track.track_id);
                kept.push(track);
            }
            None => {
                baseline.next_id += 1;
                outcome.flags.push(true);
                outcome.track_ids.push(baseline.next_id);
                kept.push(Track {
                    track_id: baseline.next_id,
                    bbox: region.bbox,
                    area_ema: area,
                });
            }
        }
    }
    outcome.disappeared = baseline
        .tracks
        .iter()
        .zip(&track_taken)
        .filter(|(_, &taken)| !taken)
        .map(|(t, _)| t.track_id)
        .collect();
    baseline.tracks = kept;
    outcome
}

/// Runs [`detect_size_deviation`] on a report and stores the flags in it.
pub fn apply_to_report(report: &mut SegmentationReport, baseline: &mut SizeBaseline, config: &DeviationConfig) {
    let outcome = detect_size_deviation(&report.regions, baseline, config);
    report.size_deviation_flags = outcome.flags;
    report.disappeared = outcome.disappeared;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(id: u32, area: usize, r0: usize, c0: usize) -> Region {
        Region {
            region_id: id,
            pixel_area: area,
            bbox: BoundingBox {
                min_row: r0,
                min_col: c0,
                max_row: r0 + 9,
                max_col: c0 + 9,
            },
            mean_temp_c: 50.0,
        }
    }

    fn seeded(area: f64) -> SizeBaseline {
        let mut b = SizeBaseline::new();
        b.insert(region(1, 0, 0, 0).bbox, area);
        b
    }

    #[test]
    fn equal_area_not_flagged() {
        let mut b = seeded(100.0);
        let out = detect_size_deviation(&[region(1, 100, 0, 0)], &mut b, &DeviationConfig::default());
        assert_eq!(out.flags, vec![false]);
        assert!(out.disappeared.is_empty());
    }

    #[test]
    fn thirty_percent_growth_flagged_and_ema_updated() {
        let mut b = seeded(100.0);
        let out = detect_size_deviation(&[region(1, 130, 0, 0)], &mut b, &DeviationConfig::default());
        assert_eq!(out.flags, vec![true]);
        assert!((b.tracks()[0].area_ema - 103.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_is_not_flagged() {
        // 0.2 exactly is not > rel_tol
        assert_eq!(relative_deviation(120.0, 100.0), 0.2);
        let mut b = seeded(100.0);
        let out = detect_size_deviation(&[region(1, 120, 0, 0)], &mut b, &DeviationConfig::default());
        assert_eq!(out.flags, vec![false]);
    }

    #[test]
    fn disappearance_and_appearance_flagged() {
        let mut b = seeded(100.0);
        let out = detect_size_deviation(&[], &mut b, &DeviationConfig::default());
        assert_eq!(out.disappeared, vec![1]);
        assert!(b.tracks().is_empty());

        let out = detect_size_deviation(&[region(1, 50, 30, 30)], &mut b, &DeviationConfig::default());
        assert_eq!(out.flags, vec![true]);
        assert_eq!(b.tracks().len(), 1);
    }

    #[test]
    fn matching_prefers_best_overlap() {
        let mut b = SizeBaseline::new();
        let near = b.insert(region(0, 0, 0, 0).bbox, 100.0);
        let far = b.insert(region(0, 0, 20, 20).bbox, 50.0);
        let current = [region(1, 52, 21, 21), region(2, 100, 1, 0)];
        let out = detect_size_deviation(&current, &mut b, &DeviationConfig::default());
        assert_eq!(out.track_ids, vec![far, near]);
        assert_eq!(out.flags, vec![false, false]);
    }

    #[test]
    fn tiny_baseline_uses_unit_floor() {
        assert_eq!(relative_deviation(1.0, 0.0), 1.0);
    }
}
