//! Stream scanning: per-frame fusion, per-frame decisions and the
//! all-frames-must-agree window rule.

mod fusion;
mod report;

pub use fusion::{
    frame_decision, fused_similarity, segment_identified, signature_threshold, Thresholds, Weights,
};
pub use report::{format_report, write_report, REPORT_HEADER};

use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use crate::catalogue::{Catalogue, CatalogueEntry};
use crate::ccv::ccv_similarity;
use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use crate::io::FrameSource;
use crate::poi::poi_similarity;
use crate::signature::{frame_signature, DescriptorParams, FrameSignature, ParamSnapshot};

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub program_id: String,
    /// First frame of the matched window.
    pub stream_offset: usize,
    /// Mean fused similarity over the window's sampled frames.
    pub score: f64,
}

/// POI correspondence tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchParams {
    pub thre_dist: f64,
    pub thre_harris: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            thre_dist: 4.0,
            thre_harris: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub stride: usize,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    /// Descriptor parameters the stream is signed with; every catalogue
    /// entry must have been built with the same values.
    pub descriptor: DescriptorParams,
    pub matching: MatchParams,
    /// When set, every entry must use exactly this many frames / this step.
    pub n_frame: Option<u32>,
    pub t_step: Option<u32>,
    /// Compute each stream frame's signature once and reuse it across the
    /// windows it falls in.
    pub cache: bool,
    /// Record offsets where no entry matched.
    pub emit_undefined: bool,
    pub report_path: Option<PathBuf>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            stride: 1,
            jobs: 0,
            descriptor: DescriptorParams::default(),
            matching: MatchParams::default(),
            n_frame: None,
            t_step: None,
            cache: true,
            emit_undefined: false,
            report_path: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanOutcome {
    /// Merged detections sorted by `(stream_offset, program_id)`.
    pub detections: Vec<Detection>,
    /// Offsets where no entry matched; only filled with `emit_undefined`.
    pub undefined: Vec<usize>,
    pub frames_read: usize,
}

/// Hook applied to every per-frame decision before the window rule; used
/// to probe the all-or-nothing behaviour.
pub trait DecisionFilter: Sync {
    fn filter(&self, program_id: &str, offset: usize, position: usize, decision: bool) -> bool;
}

impl<F> DecisionFilter for F
where
    F: Fn(&str, usize, usize, bool) -> bool + Sync,
{
    fn filter(&self, program_id: &str, offset: usize, position: usize, decision: bool) -> bool {
        self(program_id, offset, position, decision)
    }
}

struct PassThrough;

impl DecisionFilter for PassThrough {
    fn filter(&self, _: &str, _: usize, _: usize, decision: bool) -> bool {
        decision
    }
}

/// Similarities of a stream frame against a catalogue frame, CCV then POI.
pub fn frame_similarity(
    reference: &FrameSignature,
    observed: &FrameSignature,
    matching: &MatchParams,
) -> Result<(f64, f64)> {
    let ccv = ccv_similarity(&reference.ccv, &observed.ccv)?;
    let poi = poi_similarity(
        &reference.poi,
        &observed.poi,
        matching.thre_dist,
        matching.thre_harris,
    );
    Ok((ccv, poi))
}

pub fn scan_stream(
    src: &mut FrameSource,
    catalogue: &Catalogue,
    cfg: &ScanConfig,
) -> Result<Vec<Detection>> {
    Ok(scan_stream_with(src, catalogue, cfg, &PassThrough)?.detections)
}

enum Slot {
    Signed(Arc<FrameSignature>),
    Raw(GrayFrame),
}

struct Window<'a> {
    slots: &'a VecDeque<Slot>,
    base: usize,
    snapshot: ParamSnapshot,
}

impl Window<'_> {
    fn signature(&self, index: usize) -> Result<Arc<FrameSignature>> {
        match &self.slots[index - self.base] {
            Slot::Signed(s) => Ok(Arc::clone(s)),
            Slot::Raw(f) => Ok(Arc::new(frame_signature(f, &self.snapshot)?)),
        }
    }

    fn end(&self) -> usize {
        self.base + self.slots.len()
    }
}

/// Mean fused score when every sampled frame of the window is accepted.
fn evaluate_entry<F: DecisionFilter + ?Sized>(
    entry: &CatalogueEntry,
    offset: usize,
    window: &Window<'_>,
    matching: &MatchParams,
    filter: &F,
) -> Result<Option<f64>> {
    let vsig = entry.vsig();
    let step = vsig.t_step() as usize;
    let (w, th) = (entry.weights(), entry.thresholds());
    let mut total = 0.0;
    for (i, reference) in vsig.frames().iter().enumerate() {
        let observed = window.signature(offset + i * step)?;
        let (s_ccv, s_poi) = frame_similarity(reference, &observed, matching)?;
        let fused = fused_similarity(s_ccv, s_poi, &w)?;
        let decision = filter.filter(
            entry.program_id(),
            offset,
            i,
            frame_decision(fused, &th, &w),
        );
        if !decision {
            return Ok(None);
        }
        total += fused;
    }
    Ok(Some(total / vsig.n_frame() as f64))
}

fn check_entries(catalogue: &Catalogue, cfg: &ScanConfig, snapshot: &ParamSnapshot) -> Result<()> {
    for e in catalogue.entries() {
        let v = e.vsig();
        if let Some(diff) = v.params().first_difference(snapshot) {
            return Err(Error::ParamsMismatch(format!(
                "entry `{}` was signed with different parameters ({diff})",
                e.program_id()
            )));
        }
        if let Some(t) = cfg.t_step.filter(|&t| t != v.t_step()) {
            return Err(Error::ParamsMismatch(format!(
                "entry `{}` has t_step={}, scan requested {t}",
                e.program_id(),
                v.t_step()
            )));
        }
        if let Some(n) = cfg.n_frame.filter(|&n| n != v.n_frame()) {
            return Err(Error::ParamsMismatch(format!(
                "entry `{}` has n_frame={}, scan requested {n}",
                e.program_id(),
                v.n_frame()
            )));
        }
    }
    Ok(())
}

/// Scans with a decision hook. Output is independent of `cfg.jobs` and
/// `cfg.cache`.
pub fn scan_stream_with<F: DecisionFilter>(
    src: &mut FrameSource,
    catalogue: &Catalogue,
    cfg: &ScanConfig,
    filter: &F,
) -> Result<ScanOutcome> {
    if catalogue.is_empty() {
        return Err(Error::InvalidParameter("catalogue is empty".into()));
    }
    if cfg.stride == 0 {
        return Err(Error::InvalidParameter("stride must be at least 1".into()));
    }
    cfg.descriptor.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    pool.install(|| scan_inner(src, catalogue, cfg, filter))
}

fn scan_inner<F: DecisionFilter>(
    src: &mut FrameSource,
    catalogue: &Catalogue,
    cfg: &ScanConfig,
    filter: &F,
) -> Result<ScanOutcome> {
    let max_span = catalogue
        .entries()
        .iter()
        .map(|e| e.vsig().span())
        .max()
        .expect("non-empty catalogue");
    let min_span = catalogue
        .entries()
        .iter()
        .map(|e| e.vsig().span())
        .min()
        .expect("non-empty catalogue");
    let batch = max_span.max(128);

    let mut snapshot: Option<ParamSnapshot> = None;
    let mut slots: VecDeque<Slot> = VecDeque::new();
    let mut base = 0usize;
    let mut next_offset = 0usize;
    let mut raw: Vec<(usize, Detection)> = Vec::new();
    let mut undefined = Vec::new();
    let mut frames_read = 0usize;

    loop {
        let mut fresh = Vec::with_capacity(batch);
        let mut ended = false;
        while fresh.len() < batch {
            match src.next_frame()? {
                Some(f) => fresh.push(f),
                None => {
                    ended = true;
                    break;
                }
            }
        }
        frames_read += fresh.len();

        if snapshot.is_none() {
            if let Some(first) = fresh.first() {
                let snap = cfg.descriptor.resolve(first.pixel_count());
                check_entries(catalogue, cfg, &snap)?;
                snapshot = Some(snap);
            }
        }
        let Some(snap) = snapshot else {
            // no frames at all
            break;
        };

        if cfg.cache {
            let signed: Vec<Arc<FrameSignature>> = fresh
                .par_iter()
                .map(|f| frame_signature(f, &snap).map(Arc::new))
                .collect::<Result<_>>()?;
            slots.extend(signed.into_iter().map(Slot::Signed));
        } else {
            slots.extend(fresh.into_iter().map(Slot::Raw));
        }

        let window = Window {
            slots: &slots,
            base,
            snapshot: snap,
        };
        let end = window.end();
        let mut offsets = Vec::new();
        let mut j = next_offset;
        while j + if ended { min_span } else { max_span } <= end {
            offsets.push(j);
            j += cfg.stride;
        }
        next_offset = j;

        let per_offset: Vec<Vec<Detection>> = offsets
            .par_iter()
            .map(|&offset| {
                let mut found = Vec::new();
                for entry in catalogue.entries() {
                    if offset + entry.vsig().span() > end {
                        continue;
                    }
                    if let Some(score) =
                        evaluate_entry(entry, offset, &window, &cfg.matching, filter)?
                    {
                        found.push(Detection {
                            program_id: entry.program_id().to_string(),
                            stream_offset: offset,
                            score,
                        });
                    }
                }
                Ok(found)
            })
            .collect::<Result<_>>()?;

        for (offset, found) in offsets.iter().zip(per_offset) {
            if found.is_empty() {
                if cfg.emit_undefined {
                    undefined.push(*offset);
                }
            } else {
                raw.extend(found.into_iter().map(|d| (*offset, d)));
            }
        }

        while base < next_offset && !slots.is_empty() {
            slots.pop_front();
            base += 1;
        }
        if ended {
            break;
        }
    }

    let detections = merge_detections(raw.into_iter().map(|(_, d)| d).collect(), |id| {
        catalogue
            .get(id)
            .map(|e| e.vsig().t_step() as usize)
            .unwrap_or(1)
    });
    Ok(ScanOutcome {
        detections,
        undefined,
        frames_read,
    })
}

/// Collapses runs of detections of the same program whose consecutive
/// offsets are at most `window(program_id)` apart, keeping the best score
/// (earliest offset on ties). Output is sorted by `(offset, program_id)`.
pub fn merge_detections(
    mut detections: Vec<Detection>,
    window: impl Fn(&str) -> usize,
) -> Vec<Detection> {
    detections.sort_by(|a, b| {
        a.program_id
            .cmp(&b.program_id)
            .then(a.stream_offset.cmp(&b.stream_offset))
    });
    let mut merged: Vec<Detection> = Vec::new();
    let mut run_last_offset = 0usize;
    for d in detections {
        match merged.last_mut() {
            Some(best)
                if best.program_id == d.program_id
                    && d.stream_offset - run_last_offset <= window(&d.program_id) =>
            {
                run_last_offset = d.stream_offset;
                if d.score > best.score {
                    *best = d;
                }
            }
            _ => {
                run_last_offset = d.stream_offset;
                merged.push(d);
            }
        }
    }
    merged.sort_by(|a, b| {
        a.stream_offset
            .cmp(&b.stream_offset)
            .then_with(|| a.program_id.cmp(&b.program_id))
    });
    merged
}
