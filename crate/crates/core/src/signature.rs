//! Per-frame composite signatures and spatio-temporal video signatures.

use crate::ccv::{compute_ccv, default_tau, CcvSignature};
use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use crate::io::FrameSource;
use crate::poi::{detect_pois, HarrisParams, PoiSignature};
use crate::preprocess::{median_filter_3x3, quantize, DEFAULT_N_COLORS};
use crate::srm::{segment, BoundCombination, SrmParams};

pub const DEFAULT_N_FRAME: u32 = 5;
pub const DEFAULT_T_STEP: u32 = 12;

/// Descriptor configuration as supplied by the user. The coherence
/// threshold may be left to depend on the frame size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptorParams {
    pub n_color: u16,
    /// Coherence threshold in pixels; `None` means 1% of the frame.
    pub tau: Option<u32>,
    pub q: f64,
    pub k: f64,
    pub sigma: f64,
    pub n_poi: u32,
    pub nms_radius: u32,
    pub srm_bound: BoundCombination,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        DescriptorParams {
            n_color: DEFAULT_N_COLORS,
            tau: None,
            q: 32.0,
            k: 0.04,
            sigma: 1.0,
            n_poi: 50,
            nms_radius: 3,
            srm_bound: BoundCombination::Sum,
        }
    }
}

impl DescriptorParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(1..=256).contains(&self.n_color) {
            return bad(format!("n_color must be in [1, 256], got {}", self.n_color));
        }
        if self.tau == Some(0) {
            return bad("tau must be at least 1".into());
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return bad(format!("q must be positive, got {}", self.q));
        }
        if !(self.k.is_finite() && self.k >= 0.0) {
            return bad(format!("k must be non-negative, got {}", self.k));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.n_poi == 0 {
            return bad("n_poi must be at least 1".into());
        }
        Ok(())
    }

    pub fn resolve(&self, pixel_count: usize) -> ParamSnapshot {
        ParamSnapshot {
            n_color: self.n_color,
            tau: self.tau.unwrap_or_else(|| default_tau(pixel_count)),
            q: self.q,
            k: self.k,
            sigma: self.sigma,
            n_poi: self.n_poi,
            nms_radius: self.nms_radius,
            srm_bound: self.srm_bound,
        }
    }
}

impl From<ParamSnapshot> for DescriptorParams {
    fn from(s: ParamSnapshot) -> Self {
        DescriptorParams {
            n_color: s.n_color,
            tau: Some(s.tau),
            q: s.q,
            k: s.k,
            sigma: s.sigma,
            n_poi: s.n_poi,
            nms_radius: s.nms_radius,
            srm_bound: s.srm_bound,
        }
    }
}

/// Concrete descriptor parameters recorded with a signature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSnapshot {
    pub n_color: u16,
    pub tau: u32,
    pub q: f64,
    pub k: f64,
    pub sigma: f64,
    pub n_poi: u32,
    pub nms_radius: u32,
    pub srm_bound: BoundCombination,
}

impl ParamSnapshot {
    pub fn srm(&self) -> SrmParams {
        SrmParams {
            q: self.q,
            combination: self.srm_bound,
            ..SrmParams::default()
        }
    }

    pub fn harris(&self) -> HarrisParams {
        HarrisParams {
            k: self.k,
            sigma: self.sigma,
        }
    }

    /// Names the first field that differs, if any.
    pub fn first_difference(&self, other: &ParamSnapshot) -> Option<String> {
        let fields: [(&str, String, String); 8] = [
            (
                "n_color",
                self.n_color.to_string(),
                other.n_color.to_string(),
            ),
            ("tau", self.tau.to_string(), other.tau.to_string()),
            ("q", format!("{:.6}", self.q), format!("{:.6}", other.q)),
            ("k", format!("{:.6}", self.k), format!("{:.6}", other.k)),
            (
                "sigma",
                format!("{:.6}", self.sigma),
                format!("{:.6}", other.sigma),
            ),
            ("n_poi", self.n_poi.to_string(), other.n_poi.to_string()),
            (
                "nms",
                self.nms_radius.to_string(),
                other.nms_radius.to_string(),
            ),
            (
                "srm_bound",
                format!("{:?}", self.srm_bound),
                format!("{:?}", other.srm_bound),
            ),
        ];
        fields
            .into_iter()
            .find(|(_, a, b)| a != b)
            .map(|(name, a, b)| format!("{name}: {a} vs {b}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSignature {
    pub ccv: CcvSignature,
    pub poi: PoiSignature,
    pub source_index: usize,
}

/// CCV over the smoothed, quantized and segmented frame; POIs over the
/// smoothed frame.
pub fn frame_signature(f: &GrayFrame, params: &ParamSnapshot) -> Result<FrameSignature> {
    let smoothed = median_filter_3x3(f);
    let quantized = quantize(&smoothed, params.n_color)?;
    let regions = segment(&quantized, &params.srm());
    let ccv = compute_ccv(&quantized, &regions, params.tau)?;
    let poi = detect_pois(
        &smoothed,
        &params.harris(),
        params.n_poi as usize,
        params.nms_radius,
    )?;
    Ok(FrameSignature {
        ccv,
        poi,
        source_index: f.index(),
    })
}

/// Frame signatures sampled every `t_step` frames.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoSignature {
    frames: Vec<FrameSignature>,
    t_step: u32,
    params: ParamSnapshot,
}

impl VideoSignature {
    pub fn new(frames: Vec<FrameSignature>, t_step: u32, params: ParamSnapshot) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidParameter(
                "a video signature needs at least one frame".into(),
            ));
        }
        if t_step == 0 {
            return Err(Error::InvalidParameter("t_step must be at least 1".into()));
        }
        let start = frames[0].source_index;
        for (i, f) in frames.iter().enumerate() {
            let expected = start + i * t_step as usize;
            if f.source_index != expected {
                return Err(Error::InvalidParameter(format!(
                    "frame {i} was sampled at {}, expected {expected}",
                    f.source_index
                )));
            }
        }
        Ok(VideoSignature {
            frames,
            t_step,
            params,
        })
    }

    pub fn frames(&self) -> &[FrameSignature] {
        &self.frames
    }

    pub fn n_frame(&self) -> u32 {
        self.frames.len() as u32
    }

    pub fn t_step(&self) -> u32 {
        self.t_step
    }

    pub fn params(&self) -> &ParamSnapshot {
        &self.params
    }

    pub fn start(&self) -> usize {
        self.frames[0].source_index
    }

    /// Frames covered from the first to the last sample, inclusive.
    pub fn span(&self) -> usize {
        (self.frames.len() - 1) * self.t_step as usize + 1
    }
}

/// Signs frames `start, start + t_step, ...` of `src`. `start` is an
/// absolute ordinal and must not precede the source's cursor.
pub fn sign_segment(
    src: &mut FrameSource,
    start: usize,
    n_frame: u32,
    t_step: u32,
    params: &DescriptorParams,
) -> Result<VideoSignature> {
    params.validate()?;
    if n_frame == 0 || t_step == 0 {
        return Err(Error::InvalidParameter(format!(
            "n_frame and t_step must be positive, got {n_frame} and {t_step}"
        )));
    }
    if start < src.cursor() {
        return Err(Error::InvalidParameter(format!(
            "start {start} precedes the source cursor {}",
            src.cursor()
        )));
    }
    let last = start + (n_frame as usize - 1) * t_step as usize;
    if let Some(count) = src.frame_count() {
        if last >= count {
            return Err(Error::StreamExhausted(last));
        }
    }

    let mut frames = Vec::with_capacity(n_frame as usize);
    let mut snapshot = None;
    let mut wanted = start;
    while wanted <= last {
        let skip = wanted - src.cursor();
        if src.skip_frames(skip)? < skip {
            return Err(Error::StreamExhausted(last));
        }
        let frame = src.next_frame()?.ok_or(Error::StreamExhausted(last))?;
        let snap = *snapshot.get_or_insert_with(|| params.resolve(frame.pixel_count()));
        frames.push(frame_signature(&frame, &snap)?);
        wanted += t_step as usize;
    }
    VideoSignature::new(frames, t_step, snapshot.expect("at least one frame"))
}
