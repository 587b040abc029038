//! 8-bit quantization of a frame over its own temperature range.

use crate::frame::ThermalFrame;

pub const BINS: usize = 256;

/// A frame mapped linearly from `[min, max]` onto bins `0..=255`.
#[derive(Debug, Clone)]
pub struct Quantized {
    pub min_c: f64,
    pub max_c: f64,
    pub bins: Vec<u8>,
}

impl Quantized {
    pub fn from_frame(frame: &ThermalFrame) -> Self {
        let (min_c, max_c) = frame.range();
        let span = max_c - min_c;
        let bins = if span > 0.0 {
            frame
                .pixels()
                .iter()
                .map(|&v| {
                    let b = ((v - min_c) / span * BINS as f64).floor();
                    b.clamp(0.0, (BINS - 1) as f64) as u8
                })
                .collect()
        } else {
            vec![0; frame.len()]
        };
        Self { min_c, max_c, bins }
    }

    pub fn is_constant(&self) -> bool {
        self.max_c <= self.min_c
    }

    pub fn histogram(&self) -> [u64; BINS] {
        let mut h = [0u64; BINS];
        for &b in &self.bins {
            h[usize::from(b)] += 1;
        }
        h
    }

    /// Temperature at the upper edge of `bin`: pixels hotter than this fall in
    /// a higher bin.
    pub fn upper_edge_c(&self, bin: u8) -> f64 {
        if self.is_constant() {
            return self.min_c;
        }
        self.min_c + (f64::from(bin) + 1.0) * (self.max_c - self.min_c) / BINS as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time;

    #[test]
    fn maps_extremes_to_first_and_last_bin() {
        let f = ThermalFrame::new("c", time::from_unix(0), 1, 3, vec![10.0, 15.0, 20.0]).unwrap();
        let q = Quantized::from_frame(&f);
        assert_eq!(q.bins, vec![0, 128, 255]);
        assert_eq!(q.upper_edge_c(255), 20.0);
    }

    #[test]
    fn constant_frame_is_bin_zero() {
        let f = ThermalFrame::new("c", time::from_unix(0), 2, 2, vec![20.0; 4]).unwrap();
        let q = Quantized::from_frame(&f);
        assert!(q.is_constant());
        assert_eq!(q.histogram()[0], 4);
    }
}
