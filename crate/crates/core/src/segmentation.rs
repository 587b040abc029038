//! Per-frame segmentation report: Otsu foreground components plus MSER
//! regions, each summarized by area, bounding box and mean temperature.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::frame::ThermalFrame;
use crate::mser::{mser_quantized, MserParams};
use crate::otsu::segment_quantized;
use crate::quantize::Quantized;
use crate::time::{self, Timestamp};

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
}

impl BoundingBox {
    pub fn of_pixels(pixels: &[usize], cols: usize) -> Option<Self> {
        let mut it = pixels.iter().map(|&p| (p / cols, p % cols));
        let (r0, c0) = it.next()?;
        let init = Self {
            min_row: r0,
            min_col: c0,
            max_row: r0,
            max_col: c0,
        };
        Some(it.fold(init, |b, (r, c)| Self {
            min_row: b.min_row.min(r),
            min_col: b.min_col.min(c),
            max_row: b.max_row.max(r),
            max_col: b.max_col.max(c),
        }))
    }

    pub fn area(&self) -> usize {
        (self.max_row - self.min_row + 1) * (self.max_col - self.min_col + 1)
    }

    pub fn intersection_area(&self, other: &BoundingBox) -> usize {
        let rows = self.max_row.min(other.max_row) as i64 - self.min_row.max(other.min_row) as i64 + 1;
        let cols = self.max_col.min(other.max_col) as i64 - self.min_col.max(other.min_col) as i64 + 1;
        if rows <= 0 || cols <= 0 {
            0
        } else {
            (rows * cols) as usize
        }
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let inter = self.intersection_area(other);
        if inter == 0 {
            return 0.0;
        }
        inter as f64 / (self.area() + other.area() - inter) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub region_id: u32,
    pub pixel_area: usize,
    pub bbox: BoundingBox,
    pub mean_temp_c: f64,
}

impl Region {
    fn from_pixels(region_id: u32, pixels: &[usize], frame: &ThermalFrame) -> Self {
        let values = frame.pixels();
        let mean = pixels.iter().map(|&p| values[p]).sum::<f64>() / pixels.len() as f64;
        Self {
            region_id,
            pixel_area: pixels.len(),
            bbox: BoundingBox::of_pixels(pixels, frame.cols()).expect("regions are non-empty"),
            mean_temp_c: mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableRegion {
    #[serde(flatten)]
    pub region: Region,
    pub variation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationConfig {
    pub mser: MserParams,
    /// Foreground components smaller than this are treated as speckle.
    pub min_region_px: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            mser: MserParams::default(),
            min_region_px: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub camera_id: String,
    #[serde(with = "time::serde_secs")]
    pub timestamp: Timestamp,
    pub otsu_threshold_c: f64,
    /// Disjoint Otsu foreground components, ordered by first pixel.
    pub regions: Vec<Region>,
    /// Maximally stable regions (a laminar family).
    pub mser_regions: Vec<StableRegion>,
    /// One flag per entry of `regions`, filled by size-deviation tracking.
    pub size_deviation_flags: Vec<bool>,
    /// Tracks present in the baseline but missing from this frame.
    pub disappeared: Vec<u32>,
}

impl SegmentationReport {
    pub fn any_deviation(&self) -> bool {
        !self.disappeared.is_empty() || self.size_deviation_flags.iter().any(|&f| f)
    }
}

pub fn analyze(frame: &ThermalFrame, config: &SegmentationConfig) -> Result<SegmentationReport> {
    config.mser.validate()?;
    let q = Quantized::from_frame(frame);
    let otsu = segment_quantized(frame, &q);
    let regions: Vec<Region> = otsu
        .components
        .iter()
        .filter(|c| c.area() >= config.min_region_px)
        .enumerate()
        .map(|(i, c)| Region::from_pixels(i as u32 + 1, &c.pixels, frame))
        .collect();
    let mser_regions = mser_quantized(&q, frame.rows(), frame.cols(), &config.mser)
        .into_iter()
        .enumerate()
        .map(|(i, r)| StableRegion {
            region: Region::from_pixels(i as u32 + 1, &r.pixels, frame),
            variation: r.variation,
        })
        .collect();
    Ok(SegmentationReport {
        camera_id: frame.camera_id().to_string(),
        timestamp: frame.timestamp(),
        otsu_threshold_c: otsu.threshold_c,
        size_deviation_flags: vec![false; regions.len()],
        regions,
        mser_regions,
        disappeared: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_geometry() {
        let a = BoundingBox::of_pixels(&[0, 1, 5], 4).unwrap();
        assert_eq!((a.min_row, a.min_col, a.max_row, a.max_col), (0, 0, 1, 1));
        assert_eq!(a.area(), 4);
        let b = BoundingBox { min_row: 1, min_col: 1, max_row: 2, max_col: 2 };
        assert_eq!(a.intersection_area(&b), 1);
        assert!((a.iou(&b) - 1.0 / 7.0).abs() < 1e-12);
        let far = BoundingBox { min_row: 5, min_col: 5, max_row: 6, max_col: 6 };
        assert_eq!(a.iou(&far), 0.0);
    }

    #[test]
    fn report_areas_fit_in_frame() {
        let f = ThermalFrame::from_fn("cam", time::from_unix(0), 20, 20, |r, c| {
            if (2..6).contains(&r) && (2..6).contains(&c) {
                70.0
            } else if (10..18).contains(&r) && (8..16).contains(&c) {
                60.0
            } else if r == 0 && c == 19 {
                90.0
            } else {
                20.0
            }
        })
        .unwrap();
        let report = analyze(&f, &SegmentationConfig::default()).unwrap();
        let total: usize = report.regions.iter().map(|r| r.pixel_area).sum();
        assert!(total <= 400);
        // the lone 90 °C pixel is below the speckle limit
        let mut areas: Vec<usize> = report.regions.iter().map(|r| r.pixel_area).collect();
        areas.sort_unstable();
        assert_eq!(areas, vec![16, 64]);
        assert_eq!(report.size_deviation_flags.len(), report.regions.len());
        let hot = report.regions.iter().find(|r| r.pixel_area == 16).unwrap();
        assert_eq!(hot.mean_temp_c, 70.0);
        assert_eq!((hot.bbox.min_row, hot.bbox.max_col), (2, 5));
    }
}
