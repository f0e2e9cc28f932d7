//! Per-descriptor weight estimation from labelled streams.

use std::fmt::Write as _;

use super::Catalogue;
use crate::error::{Error, Result};
use crate::identifier::{scan_stream, ScanConfig, Weights};
use crate::io::FrameSource;
use crate::truth::{group_by_stream, match_stream, MatchCounts, TruthRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Descriptor {
    Ccv,
    Poi,
}

impl Descriptor {
    pub const ALL: [Descriptor; 2] = [Descriptor::Ccv, Descriptor::Poi];

    /// Weights that silence the other descriptor.
    pub fn isolating_weights(self) -> Weights {
        match self {
            Descriptor::Ccv => Weights { ccv: 1.0, poi: 0.0 },
            Descriptor::Poi => Weights { ccv: 0.0, poi: 1.0 },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Descriptor::Ccv => "ccv",
            Descriptor::Poi => "poi",
        }
    }
}

impl std::fmt::Display for Descriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEstimate {
    pub recall: f64,
    pub precision: f64,
    pub weight: f64,
}

/// Harmonic mean of recall and precision; 0 when both are 0.
pub fn f1_weight(recall: f64, precision: f64) -> f64 {
    if recall + precision == 0.0 {
        0.0
    } else {
        2.0 * recall * precision / (recall + precision)
    }
}

pub fn calibrate_weight(ci: usize, mi: usize, fi: usize) -> Result<WeightEstimate> {
    if ci + mi == 0 {
        return Err(Error::InsufficientEvidence(
            "no truth segments, recall undefined".into(),
        ));
    }
    if ci + fi == 0 {
        return Err(Error::InsufficientEvidence(
            "no detections, precision undefined".into(),
        ));
    }
    let recall = ci as f64 / (ci + mi) as f64;
    let precision = ci as f64 / (ci + fi) as f64;
    Ok(WeightEstimate {
        recall,
        precision,
        weight: f1_weight(recall, precision),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub descriptor: Descriptor,
    pub ci: usize,
    pub mi: usize,
    pub fi: usize,
    pub recall: f64,
    pub precision: f64,
    pub weight: f64,
}

impl CalibrationReport {
    pub fn from_counts(descriptor: Descriptor, c: MatchCounts) -> Result<Self> {
        let est = calibrate_weight(c.ci, c.mi, c.fi).map_err(|e| match e {
            Error::InsufficientEvidence(msg) => {
                Error::InsufficientEvidence(format!("{descriptor}: {msg}"))
            }
            other => other,
        })?;
        Ok(CalibrationReport {
            descriptor,
            ci: c.ci,
            mi: c.mi,
            fi: c.fi,
            recall: est.recall,
            precision: est.precision,
            weight: est.weight,
        })
    }
}

/// Scans every stream with only `descriptor` enabled and scores the
/// detections against `truth`. `streams` pairs each truth `stream_path`
/// with its source, which is reopened from frame 0; truth naming a stream
/// not supplied counts as missed.
pub fn run_calibration(
    catalogue: &Catalogue,
    truth: &[TruthRecord],
    streams: &[(String, FrameSource)],
    descriptor: Descriptor,
    cfg: &ScanConfig,
) -> Result<CalibrationReport> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    for t in truth {
        if catalogue.get(&t.program_id).is_none() {
            return Err(Error::UnknownProgram(t.program_id.clone()));
        }
    }
    let mut isolated = catalogue.clone();
    for e in isolated.entries_mut() {
        e.set_weights(descriptor.isolating_weights())?;
    }
    let tolerance = |id: &str| {
        catalogue
            .get(id)
            .map(|e| e.vsig().t_step() as usize)
            .unwrap_or(0)
    };

    let by_stream = group_by_stream(truth);
    let mut counts = MatchCounts::default();
    for (name, src) in streams {
        let detections = scan_stream(&mut src.reopen()?, &isolated, cfg)?;
        let refs = by_stream.get(name.as_str()).cloned().unwrap_or_default();
        counts += match_stream(&detections, &refs, tolerance);
    }
    for (name, recs) in &by_stream {
        if !streams.iter().any(|(n, _)| n == name) {
            counts.mi += recs.len();
        }
    }
    CalibrationReport::from_counts(descriptor, counts)
}

/// Table with recall, precision and weight columns per descriptor.
pub fn format_calibration_table(reports: &[CalibrationReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>6} {:>6} {:>6} {:>8} {:>8} {:>6}",
        "descriptor", "CI", "MI", "FI", "R", "P", "w"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<10} {:>6} {:>6} {:>6} {:>8.4} {:>8.4} {:>6.2}",
            r.descriptor.name(),
            r.ci,
            r.mi,
            r.fi,
            r.recall,
            r.precision,
            r.weight
        );
    }
    out
}
