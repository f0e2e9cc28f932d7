//! Reference catalogue of jingle signatures and its versioned text format.
//!
//! ```text
//! JINGLEPRINT-CATALOGUE v1
//! ENTRY <program_id> <channel>
//! PARAMS n_frame=<int> t_step=<int> n_color=<int> tau=<int> q=<real> k=<real> sigma=<real> n_poi=<int> nms=<int>
//! WEIGHTS ccv=<real> poi=<real>
//! THRESHOLDS ccv=<real> poi=<real>
//! FRAME <source_index>
//! CCV <alpha_0> <beta_0> ... <alpha_n-1> <beta_n-1>
//! POI <count>
//! <x> <y> <response>
//! ...
//! END
//! CHECKSUM <crc32 hex of every preceding byte>
//! ```
//!
//! Reals carry six decimals. A `srm_bound=quadrature` token is appended to
//! `PARAMS` only for signatures built with the non-default merging bound.

pub mod calibration;

use std::fmt::Write as _;
use std::path::Path;

use crate::ccv::{CcvSignature, CoherencePair};
use crate::error::{Error, Result};
use crate::identifier::{Thresholds, Weights};
use crate::poi::{Poi, PoiSignature};
use crate::signature::{FrameSignature, ParamSnapshot, VideoSignature};
use crate::srm::BoundCombination;

pub use calibration::{
    calibrate_weight, f1_weight, format_calibration_table, run_calibration, CalibrationReport,
    Descriptor, WeightEstimate,
};

pub const MAGIC: &str = "JINGLEPRINT-CATALOGUE v1";

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn check_token(kind: &str, value: &str) -> Result<()> {
    if value.is_empty() || value.chars().any(|c| c.is_whitespace() || c == ',') {
        return Err(Error::InvalidParameter(format!(
            "{kind} `{value}` must be non-empty without whitespace or commas"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogueEntry {
    program_id: String,
    channel: String,
    vsig: VideoSignature,
    weights: Weights,
    thresholds: Thresholds,
}

impl CatalogueEntry {
    /// Validates the entry; reals are rounded to the six decimals the file
    /// format keeps.
    pub fn new(
        program_id: impl Into<String>,
        channel: impl Into<String>,
        vsig: VideoSignature,
        weights: Weights,
        thresholds: Thresholds,
    ) -> Result<Self> {
        let program_id = program_id.into();
        let channel = channel.into();
        check_token("program id", &program_id)?;
        check_token("channel", &channel)?;
        let mut entry = CatalogueEntry {
            program_id,
            channel,
            vsig,
            weights,
            thresholds,
        };
        entry.set_weights(weights)?;
        entry.set_thresholds(thresholds)?;
        let mut params = *entry.vsig.params();
        params.q = round6(params.q);
        params.k = round6(params.k);
        params.sigma = round6(params.sigma);
        entry.vsig =
            VideoSignature::new(entry.vsig.frames().to_vec(), entry.vsig.t_step(), params)?;
        Ok(entry)
    }

    pub fn program_id(&self) -> &str {
        &self.program_id
    }

    pub fn channel(&self) -> &str {
        &self.channel
    }

    pub fn vsig(&self) -> &VideoSignature {
        &self.vsig
    }

    pub fn weights(&self) -> Weights {
        self.weights
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn set_weights(&mut self, w: Weights) -> Result<()> {
        let w = Weights {
            ccv: round6(w.ccv),
            poi: round6(w.poi),
        };
        w.validate()?;
        self.weights = w;
        Ok(())
    }

    pub fn set_thresholds(&mut self, th: Thresholds) -> Result<()> {
        let th = Thresholds {
            ccv: round6(th.ccv),
            poi: round6(th.poi),
        };
        th.validate()?;
        self.thresholds = th;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Catalogue {
    entries: Vec<CatalogueEntry>,
}

impl Catalogue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[CatalogueEntry] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [CatalogueEntry] {
        &mut self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, program_id: &str) -> Option<&CatalogueEntry> {
        self.entries.iter().find(|e| e.program_id == program_id)
    }

    pub fn add(&mut self, entry: CatalogueEntry) -> Result<()> {
        if self.get(&entry.program_id).is_some() {
            return Err(Error::DuplicateProgram(entry.program_id));
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Adds or replaces in place; returns true when an entry was replaced.
    pub fn upsert(&mut self, entry: CatalogueEntry) -> bool {
        match self
            .entries
            .iter_mut()
            .find(|e| e.program_id == entry.program_id)
        {
            Some(slot) => {
                *slot = entry;
                true
            }
            None => {
                self.entries.push(entry);
                false
            }
        }
    }

    pub fn remove(&mut self, program_id: &str) -> Result<CatalogueEntry> {
        let pos = self
            .entries
            .iter()
            .position(|e| e.program_id == program_id)
            .ok_or_else(|| Error::UnknownProgram(program_id.to_string()))?;
        Ok(self.entries.remove(pos))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        for e in &self.entries {
            write_entry(&mut out, e);
        }
        let crc = crc32fast::hash(out.as_bytes());
        let _ = writeln!(out, "CHECKSUM {crc:08x}");
        out
    }

    pub fn from_text(text: &str) -> Result<Catalogue> {
        parse(text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Catalogue> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        parse_bytes(&bytes)
    }
}

pub fn save_catalogue(c: &Catalogue, path: impl AsRef<Path>) -> Result<()> {
    c.save(path)
}

pub fn load_catalogue(path: impl AsRef<Path>) -> Result<Catalogue> {
    Catalogue::load(path)
}

fn write_entry(out: &mut String, e: &CatalogueEntry) {
    let v = &e.vsig;
    let p = v.params();
    let _ = writeln!(out, "ENTRY {} {}", e.program_id, e.channel);
    let _ = write!(
        out,
        "PARAMS n_frame={} t_step={} n_color={} tau={} q={:.6} k={:.6} sigma={:.6} n_poi={} nms={}",
        v.n_frame(),
        v.t_step(),
        p.n_color,
        p.tau,
        p.q,
        p.k,
        p.sigma,
        p.n_poi,
        p.nms_radius
    );
    if p.srm_bound == BoundCombination::Quadrature {
        out.push_str(" srm_bound=quadrature");
    }
    out.push('\n');
    let _ = writeln!(
        out,
        "WEIGHTS ccv={:.6} poi={:.6}",
        e.weights.ccv, e.weights.poi
    );
    let _ = writeln!(
        out,
        "THRESHOLDS ccv={:.6} poi={:.6}",
        e.thresholds.ccv, e.thresholds.poi
    );
    for f in v.frames() {
        let _ = writeln!(out, "FRAME {}", f.source_index);
        out.push_str("CCV");
        for pair in f.ccv.pairs() {
            let _ = write!(out, " {} {}", pair.alpha, pair.beta);
        }
        out.push('\n');
        let _ = writeln!(out, "POI {}", f.poi.len());
        for pt in f.poi.points() {
            let _ = writeln!(out, "{} {} {:.6}", pt.x, pt.y, pt.response);
        }
    }
    out.push_str("END\n");
}

fn parse_bytes(bytes: &[u8]) -> Result<Catalogue> {
    let first_line_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .unwrap_or(bytes.len());
    let first = String::from_utf8_lossy(&bytes[..first_line_end]);
    if first != MAGIC {
        return Err(Error::VersionMismatch {
            expected: MAGIC.to_string(),
            found: first.into_owned(),
        });
    }
    verify_checksum(bytes)?;
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Malformed {
        line: 1 + bytes[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count(),
        msg: "invalid UTF-8".into(),
    })?;
    parse_body(text)
}

fn verify_checksum(bytes: &[u8]) -> Result<()> {
    // the checksum line is the last line, newline-terminated
    let body_end = bytes
        .strip_suffix(b"\n")
        .and_then(|b| b.iter().rposition(|&c| c == b'\n'))
        .map(|p| p + 1)
        .ok_or_else(|| Error::Checksum {
            recorded: "<missing>".into(),
            computed: crc32fast::hash(bytes),
        })?;
    let computed = crc32fast::hash(&bytes[..body_end]);
    let last = &bytes[body_end..bytes.len() - 1];
    let recorded = String::from_utf8_lossy(last).into_owned();
    // compared textually: the canonical form is 8 lowercase hex digits
    let ok = recorded.strip_prefix("CHECKSUM ") == Some(format!("{computed:08x}").as_str());
    if !ok {
        return Err(Error::Checksum { recorded, computed });
    }
    Ok(())
}

fn parse(text: &str) -> Result<Catalogue> {
    parse_bytes(text.as_bytes())
}

struct Lines<'a> {
    iter: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let (i, l) = self.iter.next()?;
        self.last = i + 1;
        Some((i + 1, l))
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next().ok_or_else(|| Error::Malformed {
            line: self.last + 1,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn malformed(line: usize, msg: impl Into<String>) -> Error {
    Error::Malformed {
        line,
        msg: msg.into(),
    }
}

/// Splits `KEYWORD rest` and checks the keyword.
fn keyword<'a>(line_no: usize, line: &'a str, kw: &str) -> Result<&'a str> {
    match line.split_once(' ') {
        Some((k, rest)) if k == kw => Ok(rest),
        _ if line == kw => Ok(""),
        _ => Err(malformed(
            line_no,
            format!("expected `{kw}` record, found `{line}`"),
        )),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, field: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| malformed(line, format!("bad value `{v}` for {field}")))
}

/// Values of the required keys, then any trailing `key=value` extras.
type KeyValues<'a> = (Vec<&'a str>, Vec<(&'a str, &'a str)>);

/// Parses `key=value` tokens in the exact order given.
fn key_values<'a>(line: usize, rest: &'a str, keys: &[&str]) -> Result<KeyValues<'a>> {
    let mut tokens = rest.split(' ');
    let mut values = Vec::with_capacity(keys.len());
    for &key in keys {
        let tok = tokens
            .next()
            .ok_or_else(|| malformed(line, format!("missing `{key}`")))?;
        match tok.split_once('=') {
            Some((k, v)) if k == key => values.push(v),
            _ => {
                return Err(malformed(
                    line,
                    format!("expected `{key}=...`, found `{tok}`"),
                ))
            }
        }
    }
    let mut extra = Vec::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| malformed(line, format!("unexpected token `{tok}`")))?;
        extra.push((k, v));
    }
    Ok((values, extra))
}

fn parse_body(text: &str) -> Result<Catalogue> {
    let mut lines = Lines {
        iter: text.lines().enumerate().peekable(),
        last: 0,
    };
    lines.next(); // magic, already verified
    let mut catalogue = Catalogue::new();
    loop {
        let (no, line) = lines.expect("ENTRY or CHECKSUM")?;
        if line.starts_with("CHECKSUM ") {
            if let Some((extra, _)) = lines.next() {
                return Err(malformed(extra, "content after CHECKSUM"));
            }
            return Ok(catalogue);
        }
        let rest = keyword(no, line, "ENTRY")?;
        let (program_id, channel) = rest
            .split_once(' ')
            .ok_or_else(|| malformed(no, "ENTRY needs a program id and a channel"))?;
        let entry = parse_entry(&mut lines, program_id, channel)?;
        catalogue
            .add(entry)
            .map_err(|e| malformed(no, e.to_string()))?;
    }
}

fn parse_entry(lines: &mut Lines<'_>, program_id: &str, channel: &str) -> Result<CatalogueEntry> {
    let (no, line) = lines.expect("PARAMS")?;
    let rest = keyword(no, line, "PARAMS")?;
    let (v, extra) = key_values(
        no,
        rest,
        &[
            "n_frame", "t_step", "n_color", "tau", "q", "k", "sigma", "n_poi", "nms",
        ],
    )?;
    let n_frame: u32 = parse_num(no, "n_frame", v[0])?;
    let t_step: u32 = parse_num(no, "t_step", v[1])?;
    let mut params = ParamSnapshot {
        n_color: parse_num(no, "n_color", v[2])?,
        tau: parse_num(no, "tau", v[3])?,
        q: parse_num(no, "q", v[4])?,
        k: parse_num(no, "k", v[5])?,
        sigma: parse_num(no, "sigma", v[6])?,
        n_poi: parse_num(no, "n_poi", v[7])?,
        nms_radius: parse_num(no, "nms", v[8])?,
        srm_bound: BoundCombination::Sum,
    };
    for (k, val) in extra {
        match k {
            "srm_bound" => params.srm_bound = val.parse().map_err(|e: String| malformed(no, e))?,
            other => return Err(malformed(no, format!("unknown parameter `{other}`"))),
        }
    }
    if n_frame == 0 || t_step == 0 {
        return Err(malformed(no, "n_frame and t_step must be positive"));
    }

    let (no, line) = lines.expect("WEIGHTS")?;
    let (v, extra) = key_values(no, keyword(no, line, "WEIGHTS")?, &["ccv", "poi"])?;
    if !extra.is_empty() {
        return Err(malformed(no, "unexpected WEIGHTS fields"));
    }
    let weights = Weights {
        ccv: parse_num(no, "ccv", v[0])?,
        poi: parse_num(no, "poi", v[1])?,
    };
    let (no, line) = lines.expect("THRESHOLDS")?;
    let (v, extra) = key_values(no, keyword(no, line, "THRESHOLDS")?, &["ccv", "poi"])?;
    if !extra.is_empty() {
        return Err(malformed(no, "unexpected THRESHOLDS fields"));
    }
    let thresholds = Thresholds {
        ccv: parse_num(no, "ccv", v[0])?,
        poi: parse_num(no, "poi", v[1])?,
    };

    let mut frames = Vec::with_capacity(n_frame as usize);
    for _ in 0..n_frame {
        let (no, line) = lines.expect("FRAME")?;
        let source_index: usize = parse_num(no, "FRAME", keyword(no, line, "FRAME")?)?;

        let (no, line) = lines.expect("CCV")?;
        let counts = keyword(no, line, "CCV")?
            .split(' ')
            .map(|t| parse_num::<u32>(no, "CCV count", t))
            .collect::<Result<Vec<u32>>>()?;
        if counts.len() != 2 * params.n_color as usize {
            return Err(malformed(
                no,
                format!(
                    "CCV needs {} counts for n_color={}, found {}",
                    2 * params.n_color as usize,
                    params.n_color,
                    counts.len()
                ),
            ));
        }
        let ccv = CcvSignature::from_pairs(
            counts
                .chunks_exact(2)
                .map(|c| CoherencePair {
                    alpha: c[0],
                    beta: c[1],
                })
                .collect(),
        );

        let (no, line) = lines.expect("POI")?;
        let count: usize = parse_num(no, "POI count", keyword(no, line, "POI")?)?;
        let mut points = Vec::with_capacity(count);
        for _ in 0..count {
            let (no, line) = lines.expect("POI point")?;
            let mut it = line.split(' ');
            let mut field = |name: &str| {
                it.next()
                    .ok_or_else(|| malformed(no, format!("POI point missing {name}")))
            };
            let x = parse_num(no, "x", field("x")?)?;
            let y = parse_num(no, "y", field("y")?)?;
            let response: f64 = parse_num(no, "response", field("response")?)?;
            if it.next().is_some() {
                return Err(malformed(no, "POI point has extra fields"));
            }
            if !(0.0..=1.0).contains(&response) {
                return Err(malformed(no, "POI response outside [0, 1]"));
            }
            points.push(Poi { x, y, response });
        }
        if points.windows(2).any(|w| w[0].response < w[1].response) {
            return Err(malformed(
                no,
                "POI points must be sorted by descending response",
            ));
        }
        frames.push(FrameSignature {
            ccv,
            poi: PoiSignature::from_points(points),
            source_index,
        });
    }
    let (no, line) = lines.expect("END")?;
    if line != "END" {
        return Err(malformed(no, format!("expected END, found `{line}`")));
    }
    let vsig =
        VideoSignature::new(frames, t_step, params).map_err(|e| malformed(no, e.to_string()))?;
    CatalogueEntry::new(program_id, channel, vsig, weights, thresholds)
        .map_err(|e| malformed(no, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::DescriptorParams;

    fn fixture_entry(id: &str, n_frame: usize, seed: u32) -> CatalogueEntry {
        let params = DescriptorParams {
            n_color: 4,
            ..Default::default()
        }
        .resolve(100);
        let frames = (0..n_frame)
            .map(|i| FrameSignature {
                ccv: CcvSignature::from_pairs(
                    (0..4)
                        .map(|b| CoherencePair {
                            alpha: (b * 7 + i as u32 + seed) % 20,
                            beta: (b * 3 + seed) % 5,
                        })
                        .collect(),
                ),
                poi: PoiSignature::from_points(
                    (0..3)
                        .map(|k| Poi {
                            x: 3 + k + seed,
                            y: 4 + 2 * k,
                            response: round6(1.0 / (k as f64 + 1.0) - i as f64 * 0.01),
                        })
                        .collect(),
                ),
                source_index: 10 + i * 12,
            })
            .collect();
        CatalogueEntry::new(
            id,
            "M6",
            VideoSignature::new(frames, 12, params).unwrap(),
            Weights {
                ccv: 0.888889,
                poi: 0.92,
            },
            Thresholds::default(),
        )
        .unwrap()
    }

    fn three_entries() -> Catalogue {
        let mut c = Catalogue::new();
        c.add(fixture_entry("NEWS", 5, 1)).unwrap();
        c.add(fixture_entry("SPORT", 3, 2)).unwrap();
        c.add(fixture_entry("METEO", 1, 3)).unwrap();
        c
    }

    #[test]
    fn empty_round_trip() {
        let c = Catalogue::new();
        let text = c.to_text();
        assert!(text.starts_with("JINGLEPRINT-CATALOGUE v1\nCHECKSUM "));
        assert_eq!(Catalogue::from_text(&text).unwrap(), c);
    }

    #[test]
    fn three_entry_round_trip() {
        let c = three_entries();
        let back = Catalogue::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), c.to_text());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cat.jpc");
        let c = three_entries();
        save_catalogue(&c, &path).unwrap();
        assert_eq!(load_catalogue(&path).unwrap(), c);
    }

    #[test]
    fn layout_matches_format() {
        let mut c = Catalogue::new();
        c.add(fixture_entry("J", 1, 0)).unwrap();
        let text = c.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "ENTRY J M6");
        assert_eq!(
            lines[2],
            "PARAMS n_frame=1 t_step=12 n_color=4 tau=1 q=32.000000 k=0.040000 sigma=1.000000 n_poi=50 nms=3"
        );
        assert_eq!(lines[3], "WEIGHTS ccv=0.888889 poi=0.920000");
        assert_eq!(lines[4], "THRESHOLDS ccv=0.850000 poi=0.700000");
        assert_eq!(lines[5], "FRAME 10");
        assert_eq!(lines[6], "CCV 0 0 7 3 14 1 1 4");
        assert_eq!(lines[7], "POI 3");
        assert_eq!(lines[8], "3 4 1.000000");
        assert_eq!(lines[11], "END");
        let crc = crc32fast::hash(&text.as_bytes()[..text.rfind("CHECKSUM").unwrap()]);
        assert_eq!(lines[12], format!("CHECKSUM {crc:08x}"));
    }

    #[test]
    fn wrong_magic_is_version_mismatch() {
        let text = three_entries().to_text().replacen("v1", "v2", 1);
        assert!(matches!(
            Catalogue::from_text(&text),
            Err(Error::VersionMismatch { .. })
        ));
    }

    #[test]
    fn every_corrupted_byte_is_detected() {
        let text = three_entries().to_text().into_bytes();
        for i in 0..text.len() {
            for flip in [0x01u8, 0x20, 0x80] {
                let mut bad = text.clone();
                bad[i] ^= flip;
                assert!(
                    parse_bytes(&bad).is_err(),
                    "byte {i} flip {flip:#x} undetected"
                );
            }
        }
    }

    #[test]
    fn malformed_records_carry_line_numbers() {
        let good = three_entries().to_text();
        // rewrite a record and re-seal the checksum so parsing reaches it
        let body =
            good[..good.rfind("CHECKSUM").unwrap()].replacen("WEIGHTS ccv=", "WEIGHTS cv=", 1);
        let sealed = format!("{body}CHECKSUM {:08x}\n", crc32fast::hash(body.as_bytes()));
        match Catalogue::from_text(&sealed) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_and_remove() {
        let mut c = three_entries();
        assert!(matches!(
            c.add(fixture_entry("NEWS", 1, 9)),
            Err(Error::DuplicateProgram(_))
        ));
        assert!(c.upsert(fixture_entry("NEWS", 1, 9)));
        assert_eq!(c.get("NEWS").unwrap().vsig().n_frame(), 1);
        c.remove("SPORT").unwrap();
        assert_eq!(c.len(), 2);
        assert!(matches!(c.remove("SPORT"), Err(Error::UnknownProgram(_))));
    }

    #[test]
    fn rejects_bad_identifiers_and_weights() {
        let e = fixture_entry("A", 1, 0);
        assert!(CatalogueEntry::new(
            "has space",
            "M6",
            e.vsig().clone(),
            e.weights(),
            e.thresholds()
        )
        .is_err());
        assert!(CatalogueEntry::new(
            "A",
            "M6",
            e.vsig().clone(),
            Weights { ccv: 0.0, poi: 0.0 },
            e.thresholds()
        )
        .is_err());
    }

    #[test]
    fn quadrature_bound_is_recorded() {
        let mut e = fixture_entry("Q", 1, 0);
        let mut params = *e.vsig().params();
        params.srm_bound = BoundCombination::Quadrature;
        e.vsig = VideoSignature::new(e.vsig().frames().to_vec(), 12, params).unwrap();
        let mut c = Catalogue::new();
        c.add(e).unwrap();
        let text = c.to_text();
        assert!(text.contains("nms=3 srm_bound=quadrature\n"));
        assert_eq!(Catalogue::from_text(&text).unwrap(), c);
    }
}
