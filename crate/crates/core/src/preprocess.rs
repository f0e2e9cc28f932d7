//! Smoothing and gray-level quantization applied before segmentation.

use crate::error::{Error, Result};
use crate::frame::GrayFrame;

pub const DEFAULT_N_COLORS: u16 = 64;

/// Gray frame reduced to `n_colors` buckets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedFrame {
    width: usize,
    height: usize,
    buckets: Vec<u8>,
    n_colors: u16,
}

impl QuantizedFrame {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn n_colors(&self) -> u16 {
        self.n_colors
    }

    pub fn buckets(&self) -> &[u8] {
        &self.buckets
    }

    /// Representative gray level of a bucket: its lower edge, `bucket * 256 / n_colors`.
    #[inline]
    pub fn bucket_gray(&self, bucket: u8) -> u8 {
        (bucket as u32 * 256 / self.n_colors as u32) as u8
    }

    /// Buckets mapped back onto the 0..=255 gray scale.
    pub fn to_gray_values(&self) -> Vec<u8> {
        let lut: Vec<u8> = (0..self.n_colors)
            .map(|b| self.bucket_gray(b as u8))
            .collect();
        self.buckets.iter().map(|&b| lut[b as usize]).collect()
    }

    pub fn histogram(&self) -> Vec<u32> {
        let mut h = vec![0u32; self.n_colors as usize];
        for &b in &self.buckets {
            h[b as usize] += 1;
        }
        h
    }
}

/// 3×3 median with edge pixels replicated.
pub fn median_filter_3x3(f: &GrayFrame) -> GrayFrame {
    let (w, h) = (f.width(), f.height());
    let src = f.luma();
    let mut out = vec![0u8; w * h];
    let mut window = [0u8; 9];
    for y in 0..h {
        let rows = [y.saturating_sub(1), y, (y + 1).min(h - 1)];
        for x in 0..w {
            let cols = [x.saturating_sub(1), x, (x + 1).min(w - 1)];
            let mut k = 0;
            for &ry in &rows {
                let row = &src[ry * w..(ry + 1) * w];
                for &cx in &cols {
                    window[k] = row[cx];
                    k += 1;
                }
            }
            let (_, median, _) = window.select_nth_unstable(4);
            out[y * w + x] = *median;
        }
    }
    GrayFrame::new(w, h, out)
        .expect("dimensions preserved")
        .with_index(f.index())
}

/// `bucket = floor(luma * n_colors / 256)`.
pub fn quantize(f: &GrayFrame, n_colors: u16) -> Result<QuantizedFrame> {
    if !(1..=256).contains(&n_colors) {
        return Err(Error::InvalidParameter(format!(
            "n_colors must be in [1, 256], got {n_colors}"
        )));
    }
    let lut: Vec<u8> = (0..256u32)
        .map(|v| (v * n_colors as u32 / 256) as u8)
        .collect();
    Ok(QuantizedFrame {
        width: f.width(),
        height: f.height(),
        buckets: f.luma().iter().map(|&v| lut[v as usize]).collect(),
        n_colors,
    })
}

/// 3×3 mean with edge replication, rounded to nearest.
pub fn box_blur_3x3(f: &GrayFrame) -> GrayFrame {
    let (w, h) = (f.width(), f.height());
    GrayFrame::from_fn(w, h, |x, y| {
        let mut sum = 0u32;
        for dy in -1..=1 {
            for dx in -1..=1 {
                sum += f.get_clamped(x as isize + dx, y as isize + dy) as u32;
            }
        }
        ((sum + 4) / 9) as u8
    })
    .with_index(f.index())
}
