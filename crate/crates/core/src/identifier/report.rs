use std::fmt::Write as _;
use std::path::Path;

use super::Detection;
use crate::error::{Error, Result};

pub const REPORT_HEADER: &str = "stream_offset,program_id,score";

/// Renders detections as CSV; they must already be sorted by offset.
pub fn format_report(detections: &[Detection]) -> Result<String> {
    if detections
        .windows(2)
        .any(|w| w[0].stream_offset > w[1].stream_offset)
    {
        return Err(Error::Unsorted);
    }
    let mut out = String::with_capacity(32 * (detections.len() + 1));
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for d in detections {
        let _ = writeln!(out, "{},{},{:.4}", d.stream_offset, d.program_id, d.score);
    }
    Ok(out)
}

pub fn write_report(detections: &[Detection], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = format_report(detections)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
