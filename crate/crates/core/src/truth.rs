//! Ground-truth records and detection-to-truth matching.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::identifier::Detection;

pub const TRUTH_HEADER: [&str; 3] = ["stream_path", "offset", "program_id"];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TruthRecord {
    pub stream_path: String,
    pub offset: usize,
    pub program_id: String,
}

pub fn read_truth_csv(path: impl AsRef<Path>) -> Result<Vec<TruthRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_truth(file)
}

pub fn parse_truth<R: std::io::Read>(reader: R) -> Result<Vec<TruthRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Truth {
        line: 1,
        msg: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != TRUTH_HEADER {
        return Err(Error::Truth {
            line: 1,
            msg: format!("expected header `{}`", TRUTH_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Truth {
            line,
            msg: e.to_string(),
        })?;
        if rec.len() != 3 {
            return Err(Error::Truth {
                line,
                msg: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let offset = rec[1].trim().parse().map_err(|_| Error::Truth {
            line,
            msg: format!("bad offset `{}`", &rec[1]),
        })?;
        out.push(TruthRecord {
            stream_path: rec[0].to_string(),
            offset,
            program_id: rec[2].to_string(),
        });
    }
    Ok(out)
}

pub fn write_truth_csv(path: impl AsRef<Path>, records: &[TruthRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let io = |e: csv::Error| Error::io(path, e.into());
    w.write_record(TRUTH_HEADER).map_err(io)?;
    for r in records {
        w.write_record([&r.stream_path, &r.offset.to_string(), &r.program_id])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Correct, missed and false identification counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchCounts {
    pub ci: usize,
    pub mi: usize,
    pub fi: usize,
}

impl MatchCounts {
    pub fn recall(&self) -> Option<f64> {
        let d = self.ci + self.mi;
        (d > 0).then(|| self.ci as f64 / d as f64)
    }

    pub fn precision(&self) -> Option<f64> {
        let d = self.ci + self.fi;
        (d > 0).then(|| self.ci as f64 / d as f64)
    }
}

impl std::ops::AddAssign for MatchCounts {
    fn add_assign(&mut self, o: Self) {
        self.ci += o.ci;
        self.mi += o.mi;
        self.fi += o.fi;
    }
}

/// Matches one stream's detections against its truth records. A detection
/// of the same program within `tolerance(program_id)` frames of a truth
/// offset is a correct identification; each detection serves one truth.
pub fn match_stream(
    detections: &[Detection],
    truth: &[&TruthRecord],
    tolerance: impl Fn(&str) -> usize,
) -> MatchCounts {
    let mut used = vec![false; detections.len()];
    let mut counts = MatchCounts::default();
    let mut ordered: Vec<&&TruthRecord> = truth.iter().collect();
    ordered.sort_by_key(|t| (t.offset, t.program_id.as_str()));
    for t in ordered {
        let tol = tolerance(&t.program_id);
        let best = detections
            .iter()
            .enumerate()
            .filter(|(i, d)| {
                !used[*i]
                    && d.program_id == t.program_id
                    && d.stream_offset.abs_diff(t.offset) <= tol
            })
            .min_by_key(|(i, d)| (d.stream_offset.abs_diff(t.offset), *i));
        match best {
            Some((i, _)) => {
                used[i] = true;
                counts.ci += 1;
            }
            None => counts.mi += 1,
        }
    }
    counts.fi = used.iter().filter(|u| !**u).count();
    counts
}

/// Groups truth records by stream, preserving first-appearance order.
pub fn group_by_stream(truth: &[TruthRecord]) -> BTreeMap<&str, Vec<&TruthRecord>> {
    let mut map: BTreeMap<&str, Vec<&TruthRecord>> = BTreeMap::new();
    for t in truth {
        map.entry(t.stream_path.as_str()).or_default().push(t);
    }
    map
}
