use crate::error::{Error, Result};

/// Per-descriptor fusion weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub ccv: f64,
    pub poi: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { ccv: 1.0, poi: 1.0 }
    }
}

impl Weights {
    pub fn validate(&self) -> Result<()> {
        if !(self.ccv >= 0.0 && self.poi >= 0.0 && self.ccv.is_finite() && self.poi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weights must be non-negative, got ccv={} poi={}",
                self.ccv, self.poi
            )));
        }
        if self.total() <= 0.0 {
            return Err(Error::ZeroWeight);
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.ccv + self.poi
    }

    pub fn scaled(&self, c: f64) -> Weights {
        Weights {
            ccv: self.ccv * c,
            poi: self.poi * c,
        }
    }
}

/// Per-descriptor similarity thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub ccv: f64,
    pub poi: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            ccv: 0.85,
            poi: 0.70,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !((0.0..=1.0).contains(&self.ccv) && (0.0..=1.0).contains(&self.poi)) {
            return Err(Error::InvalidParameter(format!(
                "thresholds must lie in [0, 1], got ccv={} poi={}",
                self.ccv, self.poi
            )));
        }
        Ok(())
    }
}

/// Weighted mean of the two descriptor similarities.
pub fn fused_similarity(sim_ccv: f64, sim_poi: f64, w: &Weights) -> Result<f64> {
    let total = w.total();
    if total <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    Ok((w.ccv * sim_ccv + w.poi * sim_poi) / total)
}

/// The decision threshold: thresholds averaged with the same weights as
/// their descriptors.
pub fn signature_threshold(th: &Thresholds, w: &Weights) -> f64 {
    (w.ccv * th.ccv + w.poi * th.poi) / w.total()
}

/// 1 when the fused similarity strictly exceeds the weighted threshold.
pub fn frame_decision(fused: f64, th: &Thresholds, w: &Weights) -> bool {
    fused > signature_threshold(th, w)
}

/// A window is identified only when every sampled frame's decision is 1.
pub fn segment_identified<I: IntoIterator<Item = bool>>(decisions: I) -> bool {
    let mut any = false;
    for d in decisions {
        if !d {
            return false;
        }
        any = true;
    }
    any
}
