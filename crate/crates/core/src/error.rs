use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed header at byte {offset}: {msg}")]
    Header {
        path: PathBuf,
        offset: u64,
        msg: String,
    },

    #[error("{path}: unsupported format: {msg}")]
    Unsupported { path: PathBuf, msg: String },

    #[error("{path}: truncated frame {frame}: expected {expected} bytes, {available} available")]
    Truncated {
        path: PathBuf,
        frame: usize,
        expected: usize,
        available: usize,
    },

    #[error("{0}: no frames found")]
    NoFrames(PathBuf),

    #[error(
        "frame dimensions changed within a source: {expected_w}x{expected_h} then {got_w}x{got_h}"
    )]
    DimensionChange {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stream exhausted before frame {0}")]
    StreamExhausted(usize),

    #[error("catalogue version mismatch: expected `{expected}`, found `{found}`")]
    VersionMismatch { expected: String, found: String },

    #[error("catalogue checksum failure: recorded {recorded}, computed {computed:08x}")]
    Checksum { recorded: String, computed: u32 },

    #[error("catalogue line {line}: {msg}")]
    Malformed { line: usize, msg: String },

    #[error("program `{0}` already present in catalogue")]
    DuplicateProgram(String),

    #[error("program `{0}` not found in catalogue")]
    UnknownProgram(String),

    #[error("parameter mismatch: {0}")]
    ParamsMismatch(String),

    #[error("insufficient training evidence: {0}")]
    InsufficientEvidence(String),

    #[error("fusion weights must have a positive sum")]
    ZeroWeight,

    #[error("detections must be sorted by stream offset")]
    Unsorted,

    #[error("truth set is empty")]
    EmptyTruth,

    #[error("truth file line {line}: {msg}")]
    Truth { line: usize, msg: String },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem or by undecodable input
    /// bytes, as opposed to inconsistent parameters or catalogue contents.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Header { .. }
                | Error::Unsupported { .. }
                | Error::Truncated { .. }
                | Error::NoFrames(_)
                | Error::DimensionChange { .. }
        )
    }
}
