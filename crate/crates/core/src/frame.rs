use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// An 8-bit luma raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    luma: Vec<u8>,
    index: usize,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, luma: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        if luma.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} frame needs {} luma bytes, got {}",
                width * height,
                luma.len()
            )));
        }
        Ok(GrayFrame {
            width,
            height,
            luma,
            index: 0,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0);
        GrayFrame {
            width,
            height,
            luma: vec![value; width * height],
            index: 0,
        }
    }

    /// Builds a frame by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0);
        let mut luma = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                luma.push(f(x, y));
            }
        }
        GrayFrame {
            width,
            height,
            luma,
            index: 0,
        }
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.luma.len()
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn luma(&self) -> &[u8] {
        &self.luma
    }

    pub fn luma_mut(&mut self) -> &mut [u8] {
        &mut self.luma
    }

    pub fn into_luma(self) -> Vec<u8> {
        self.luma
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.luma[y * self.width + x]
    }

    /// Pixel at `(x, y)` with coordinates clamped into the frame.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.luma[cy * self.width + cx]
    }

    /// Serializes as binary PGM (P5, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.luma);
        out
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&self.to_pgm())
            .map_err(|e| Error::io(path, e))
    }
}

/// BT.601 luma with round-half-up, computed in integer arithmetic
/// (weights scaled by 1000) so that exact halves round consistently.
#[inline]
pub fn rgb_to_luma(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    // weights sum to 1000, so the result never exceeds 255
    ((weighted + 500) / 1000) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luma_examples() {
        assert_eq!(rgb_to_luma(255, 255, 255), 255);
        assert_eq!(rgb_to_luma(0, 0, 0), 0);
        // 0.299 * 255 = 76.245
        assert_eq!(rgb_to_luma(255, 0, 0), 76);
        assert_eq!(rgb_to_luma(0, 255, 0), 150); // 149.685
        assert_eq!(rgb_to_luma(0, 0, 255), 29); // 29.07
    }

    #[test]
    fn luma_matches_float_formula_on_sampled_cube() {
        for r in (0..=255u32).step_by(5) {
            for g in (0..=255u32).step_by(3) {
                for b in (0..=255u32).step_by(7) {
                    let exact = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
                    let got = rgb_to_luma(r as u8, g as u8, b as u8) as f64;
                    // round-half-up: got - exact lies in (-0.5, 0.5]
                    let diff = got - exact;
                    assert!(diff <= 0.5 + 1e-9 && diff > -0.5 + 1e-9, "{r} {g} {b}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(GrayFrame::new(0, 4, vec![]).is_err());
        assert!(GrayFrame::new(2, 2, vec![0; 3]).is_err());
    }
}
