//! Frame sources: image-sequence directories, Y4M files and in-memory lists.

pub mod netpbm;
pub mod y4m;

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frame::GrayFrame;

pub use netpbm::read_image;
pub use y4m::{write_y4m, Chroma, Y4mReader, Y4mWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameFormat {
    PpmSequence,
    PgmSequence,
    Y4m,
}

impl FrameFormat {
    fn extension(self) -> &'static str {
        match self {
            FrameFormat::PpmSequence => "ppm",
            FrameFormat::PgmSequence => "pgm",
            FrameFormat::Y4m => "y4m",
        }
    }

    /// Guesses the format from a path: `.y4m` files, or directories holding
    /// `.ppm` / `.pgm` files.
    pub fn detect(path: &Path) -> Result<FrameFormat> {
        if path.is_dir() {
            let mut has_ppm = false;
            let mut has_pgm = false;
            for name in dir_file_names(path)? {
                match extension_lower(&name).as_deref() {
                    Some("ppm") => has_ppm = true,
                    Some("pgm") => has_pgm = true,
                    _ => {}
                }
            }
            return match (has_ppm, has_pgm) {
                (true, false) => Ok(FrameFormat::PpmSequence),
                (false, true) => Ok(FrameFormat::PgmSequence),
                (true, true) => Err(Error::Unsupported {
                    path: path.to_path_buf(),
                    msg: "directory mixes .ppm and .pgm frames; pass --format".into(),
                }),
                (false, false) => Err(Error::NoFrames(path.to_path_buf())),
            };
        }
        match extension_lower(path).as_deref() {
            Some("y4m") => Ok(FrameFormat::Y4m),
            _ if !path.exists() => Err(Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
            )),
            _ => Err(Error::Unsupported {
                path: path.to_path_buf(),
                msg: "expected a .y4m file or a directory of .ppm/.pgm frames".into(),
            }),
        }
    }
}

impl fmt::Display for FrameFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameFormat::PpmSequence => "ppm-sequence",
            FrameFormat::PgmSequence => "pgm-sequence",
            FrameFormat::Y4m => "y4m",
        })
    }
}

impl FromStr for FrameFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ppm" | "ppm-sequence" => Ok(FrameFormat::PpmSequence),
            "pgm" | "pgm-sequence" => Ok(FrameFormat::PgmSequence),
            "y4m" => Ok(FrameFormat::Y4m),
            other => Err(format!(
                "unknown frame format `{other}` (expected ppm-sequence, pgm-sequence or y4m)"
            )),
        }
    }
}

fn extension_lower(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

fn dir_file_names(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() {
            names.push(path);
        }
    }
    Ok(names)
}

#[derive(Debug, Clone)]
pub enum Origin {
    File { path: PathBuf, format: FrameFormat },
    Memory,
}

enum Inner {
    Sequence(Vec<PathBuf>),
    Y4m(Box<Y4mReader<BufReader<File>>>),
    Memory(Arc<Vec<GrayFrame>>),
}

/// A single-consumer, forward-only supply of frames.
pub struct FrameSource {
    origin: Origin,
    frame_count: Option<usize>,
    cursor: usize,
    dims: Option<(usize, usize)>,
    inner: Inner,
}

impl fmt::Debug for FrameSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrameSource")
            .field("origin", &self.origin)
            .field("frame_count", &self.frame_count)
            .field("cursor", &self.cursor)
            .finish()
    }
}

pub fn open_frame_source(path: impl AsRef<Path>, format: FrameFormat) -> Result<FrameSource> {
    FrameSource::open(path, format)
}

impl FrameSource {
    pub fn open(path: impl AsRef<Path>, format: FrameFormat) -> Result<FrameSource> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
            ));
        }
        let origin = Origin::File {
            path: path.to_path_buf(),
            format,
        };
        match format {
            FrameFormat::PpmSequence | FrameFormat::PgmSequence => {
                if !path.is_dir() {
                    return Err(Error::Unsupported {
                        path: path.to_path_buf(),
                        msg: format!("{format} expects a directory"),
                    });
                }
                let ext = format.extension();
                let mut files: Vec<PathBuf> = dir_file_names(path)?
                    .into_iter()
                    .filter(|p| extension_lower(p).as_deref() == Some(ext))
                    .collect();
                if files.is_empty() {
                    return Err(Error::NoFrames(path.to_path_buf()));
                }
                files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
                Ok(FrameSource {
                    origin,
                    frame_count: Some(files.len()),
                    cursor: 0,
                    dims: None,
                    inner: Inner::Sequence(files),
                })
            }
            FrameFormat::Y4m => {
                let file = File::open(path).map_err(|e| Error::io(path, e))?;
                let reader = Y4mReader::new(BufReader::new(file), path)?;
                let dims = Some((reader.header().width, reader.header().height));
                Ok(FrameSource {
                    origin,
                    frame_count: None,
                    cursor: 0,
                    dims,
                    inner: Inner::Y4m(Box::new(reader)),
                })
            }
        }
    }

    /// Wraps already-decoded frames. Their `index` fields are rewritten to
    /// their position in the list.
    pub fn from_frames(frames: Vec<GrayFrame>) -> FrameSource {
        let frames: Vec<GrayFrame> = frames
            .into_iter()
            .enumerate()
            .map(|(i, f)| f.with_index(i))
            .collect();
        FrameSource {
            origin: Origin::Memory,
            frame_count: Some(frames.len()),
            cursor: 0,
            dims: frames.first().map(|f| (f.width(), f.height())),
            inner: Inner::Memory(Arc::new(frames)),
        }
    }

    /// A fresh source over the same origin, positioned at frame 0.
    pub fn reopen(&self) -> Result<FrameSource> {
        match (&self.origin, &self.inner) {
            (Origin::File { path, format }, _) => FrameSource::open(path, *format),
            (Origin::Memory, Inner::Memory(frames)) => Ok(FrameSource {
                origin: Origin::Memory,
                frame_count: Some(frames.len()),
                cursor: 0,
                dims: frames.first().map(|f| (f.width(), f.height())),
                inner: Inner::Memory(Arc::clone(frames)),
            }),
            (Origin::Memory, _) => unreachable!("memory origin always has memory frames"),
        }
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn frame_count(&self) -> Option<usize> {
        self.frame_count
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn next_frame(&mut self) -> Result<Option<GrayFrame>> {
        let frame = match &mut self.inner {
            Inner::Sequence(files) => match files.get(self.cursor) {
                None => return Ok(None),
                Some(path) => netpbm::read_image(path)?,
            },
            Inner::Y4m(reader) => match reader.next_frame()? {
                None => return Ok(None),
                Some(f) => f,
            },
            Inner::Memory(frames) => match frames.get(self.cursor) {
                None => return Ok(None),
                Some(f) => f.clone(),
            },
        };
        let dims = (frame.width(), frame.height());
        match self.dims {
            Some(expected) if expected != dims => {
                return Err(Error::DimensionChange {
                    expected_w: expected.0,
                    expected_h: expected.1,
                    got_w: dims.0,
                    got_h: dims.1,
                })
            }
            _ => self.dims = Some(dims),
        }
        let frame = frame.with_index(self.cursor);
        self.cursor += 1;
        Ok(Some(frame))
    }

    /// Advances past `n` frames; returns how many were actually skipped.
    pub fn skip_frames(&mut self, n: usize) -> Result<usize> {
        for skipped in 0..n {
            if self.next_frame()?.is_none() {
                return Ok(skipped);
            }
        }
        Ok(n)
    }

    /// Decodes every remaining frame.
    pub fn read_all(&mut self) -> Result<Vec<GrayFrame>> {
        self.collect()
    }
}

impl Iterator for FrameSource {
    type Item = Result<GrayFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_frame().transpose()
    }
}

/// Writes frames as `frame_000000.pgm`, `frame_000001.pgm`, ... into `dir`.
pub fn write_pgm_sequence(dir: &Path, frames: &[GrayFrame]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, f) in frames.iter().enumerate() {
        f.write_pgm(dir.join(format!("frame_{i:06}.pgm")))?;
    }
    Ok(())
}
