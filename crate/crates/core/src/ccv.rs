//! Color coherence vectors over quantized gray buckets.
//!
//! A pixel is coherent when the region it belongs to holds more than `tau`
//! pixels. Each bucket keeps a (coherent, incoherent) count pair.

use crate::error::{Error, Result};
use crate::preprocess::QuantizedFrame;
use crate::srm::RegionMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoherencePair {
    pub alpha: u32,
    pub beta: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcvSignature {
    pairs: Vec<CoherencePair>,
    pixel_total: u32,
}

impl CcvSignature {
    /// Builds a signature from explicit pairs; the pixel total is their mass.
    pub fn from_pairs(pairs: Vec<CoherencePair>) -> Self {
        let pixel_total = pairs.iter().map(|p| p.alpha + p.beta).sum();
        CcvSignature { pairs, pixel_total }
    }

    pub fn pairs(&self) -> &[CoherencePair] {
        &self.pairs
    }

    pub fn n_colors(&self) -> usize {
        self.pairs.len()
    }

    pub fn pixel_total(&self) -> u32 {
        self.pixel_total
    }
}

/// Default coherence threshold: 1% of the frame, at least one pixel.
pub fn default_tau(pixel_count: usize) -> u32 {
    ((pixel_count / 100) as u32).max(1)
}

pub fn compute_ccv(qf: &QuantizedFrame, rm: &RegionMap, tau: u32) -> Result<CcvSignature> {
    if (qf.width(), qf.height()) != (rm.width(), rm.height()) {
        return Err(Error::DimensionMismatch(format!(
            "quantized frame is {}x{}, region map is {}x{}",
            qf.width(),
            qf.height(),
            rm.width(),
            rm.height()
        )));
    }
    if tau == 0 {
        return Err(Error::InvalidParameter("tau must be at least 1".into()));
    }
    let mut pairs = vec![CoherencePair::default(); qf.n_colors() as usize];
    for (pixel, &bucket) in qf.buckets().iter().enumerate() {
        let pair = &mut pairs[bucket as usize];
        if rm.region_size(rm.label(pixel)) > tau {
            pair.alpha += 1;
        } else {
            pair.beta += 1;
        }
    }
    Ok(CcvSignature {
        pairs,
        pixel_total: qf.buckets().len() as u32,
    })
}

/// `1 - L1(a, b) / (mass(a) + mass(b))` over all α and β counts.
pub fn ccv_similarity(a: &CcvSignature, b: &CcvSignature) -> Result<f64> {
    if a.n_colors() != b.n_colors() {
        return Err(Error::DimensionMismatch(format!(
            "CCV bucket counts differ: {} vs {}",
            a.n_colors(),
            b.n_colors()
        )));
    }
    if a.pixel_total != b.pixel_total {
        return Err(Error::DimensionMismatch(format!(
            "CCV pixel totals differ: {} vs {}",
            a.pixel_total, b.pixel_total
        )));
    }
    let mut distance = 0u64;
    let mut mass = 0u64;
    for (pa, pb) in a.pairs.iter().zip(&b.pairs) {
        distance += pa.alpha.abs_diff(pb.alpha) as u64 + pa.beta.abs_diff(pb.beta) as u64;
        mass += (pa.alpha + pa.beta + pb.alpha + pb.beta) as u64;
    }
    if mass == 0 {
        return Ok(1.0);
    }
    Ok(1.0 - distance as f64 / mass as f64)
}
