//! YUV4MPEG2 reading (luma plane only) and writing.

use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::GrayFrame;

const SIGNATURE: &[u8] = b"YUV4MPEG2";
const FRAME_TAG: &[u8] = b"FRAME";
const MAX_HEADER_LINE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chroma {
    /// Any 4:2:0 siting variant; the plane sizes are identical.
    C420,
    Mono,
}

impl Chroma {
    fn plane_bytes(self, width: usize, height: usize) -> usize {
        match self {
            Chroma::C420 => 2 * width.div_ceil(2) * height.div_ceil(2),
            Chroma::Mono => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Y4mHeader {
    pub width: usize,
    pub height: usize,
    pub chroma: Chroma,
    /// Raw `F` parameter, e.g. `25:1`.
    pub framerate: Option<String>,
}

pub struct Y4mReader<R> {
    inner: R,
    path: PathBuf,
    header: Y4mHeader,
    offset: u64,
    frames_read: usize,
    chroma_scratch: Vec<u8>,
}

fn read_line<R: BufRead>(r: &mut R, buf: &mut Vec<u8>) -> std::io::Result<usize> {
    buf.clear();
    let mut limited = r.take(MAX_HEADER_LINE as u64);
    limited.read_until(b'\n', buf)
}

impl<R: BufRead> Y4mReader<R> {
    pub fn new(mut inner: R, path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut line = Vec::new();
        let n = read_line(&mut inner, &mut line).map_err(|e| Error::io(&path, e))?;
        let header_err = |offset: usize, msg: String| Error::Header {
            path: path.clone(),
            offset: offset as u64,
            msg,
        };
        if line.last() != Some(&b'\n') {
            return Err(header_err(n, "unterminated stream header".into()));
        }
        let text = &line[..line.len() - 1];
        if !text.starts_with(SIGNATURE) {
            return Err(header_err(0, "missing YUV4MPEG2 signature".into()));
        }

        let mut width = None;
        let mut height = None;
        let mut chroma = Chroma::C420;
        let mut framerate = None;
        let mut pos = SIGNATURE.len();
        for token in text[SIGNATURE.len()..].split(|&b| b == b' ') {
            let token_offset = pos;
            pos += token.len() + 1;
            if token.is_empty() {
                continue;
            }
            let value = std::str::from_utf8(&token[1..])
                .map_err(|_| header_err(token_offset, "non-ASCII parameter".into()))?;
            match token[0] {
                b'W' => {
                    width =
                        Some(value.parse::<usize>().map_err(|_| {
                            header_err(token_offset, format!("bad width `{value}`"))
                        })?)
                }
                b'H' => {
                    height =
                        Some(value.parse::<usize>().map_err(|_| {
                            header_err(token_offset, format!("bad height `{value}`"))
                        })?)
                }
                b'C' => {
                    chroma = match value {
                        "420" | "420jpeg" | "420paldv" | "420mpeg2" => Chroma::C420,
                        "mono" => Chroma::Mono,
                        other => {
                            return Err(Error::Unsupported {
                                path: path.clone(),
                                msg: format!("chroma layout C{other} at byte {token_offset}"),
                            })
                        }
                    }
                }
                b'F' => framerate = Some(value.to_string()),
                b'I' => {
                    if value != "p" && value != "?" {
                        return Err(Error::Unsupported {
                            path: path.clone(),
                            msg: format!("interlacing I{value} at byte {token_offset}"),
                        });
                    }
                }
                // aspect ratio and extensions do not affect decoding
                b'A' | b'X' => {}
                other => {
                    return Err(header_err(
                        token_offset,
                        format!("unknown parameter tag `{}`", other as char),
                    ))
                }
            }
        }
        let width = width
            .filter(|&w| w > 0)
            .ok_or_else(|| header_err(n, "missing or zero W".into()))?;
        let height = height
            .filter(|&h| h > 0)
            .ok_or_else(|| header_err(n, "missing or zero H".into()))?;

        Ok(Y4mReader {
            inner,
            path,
            header: Y4mHeader {
                width,
                height,
                chroma,
                framerate,
            },
            offset: n as u64,
            frames_read: 0,
            chroma_scratch: Vec::new(),
        })
    }

    pub fn header(&self) -> &Y4mHeader {
        &self.header
    }

    /// Reads the next frame's luma plane, or `None` at a clean end of stream.
    pub fn next_frame(&mut self) -> Result<Option<GrayFrame>> {
        let mut line = Vec::new();
        let n = read_line(&mut self.inner, &mut line).map_err(|e| Error::io(&self.path, e))?;
        if n == 0 {
            return Ok(None);
        }
        let frame_start = self.offset;
        if !line.starts_with(FRAME_TAG) || line.last() != Some(&b'\n') {
            return Err(Error::Header {
                path: self.path.clone(),
                offset: frame_start,
                msg: format!("frame {} lacks a FRAME header", self.frames_read),
            });
        }
        self.offset += n as u64;

        let (w, h) = (self.header.width, self.header.height);
        let mut luma = vec![0u8; w * h];
        let got = read_fully(&mut self.inner, &mut luma).map_err(|e| Error::io(&self.path, e))?;
        let chroma_len = self.header.chroma.plane_bytes(w, h);
        let expected = w * h + chroma_len;
        if got < luma.len() {
            return Err(self.truncated(expected, got));
        }
        self.chroma_scratch.resize(chroma_len, 0);
        let got_chroma = read_fully(&mut self.inner, &mut self.chroma_scratch)
            .map_err(|e| Error::io(&self.path, e))?;
        if got_chroma < chroma_len {
            return Err(self.truncated(expected, got + got_chroma));
        }
        self.offset += expected as u64;
        let frame = GrayFrame::new(w, h, luma)?.with_index(self.frames_read);
        self.frames_read += 1;
        Ok(Some(frame))
    }

    fn truncated(&self, expected: usize, available: usize) -> Error {
        Error::Truncated {
            path: self.path.clone(),
            frame: self.frames_read,
            expected,
            available,
        }
    }
}

fn read_fully<R: Read>(r: &mut R, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(k) => filled += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

pub struct Y4mWriter<W> {
    inner: W,
    width: usize,
    height: usize,
    chroma: Chroma,
}

impl<W: Write> Y4mWriter<W> {
    pub fn new(mut inner: W, width: usize, height: usize, chroma: Chroma) -> std::io::Result<Self> {
        let c = match chroma {
            Chroma::C420 => "420jpeg",
            Chroma::Mono => "mono",
        };
        writeln!(inner, "YUV4MPEG2 W{width} H{height} F25:1 Ip A1:1 C{c}")?;
        Ok(Y4mWriter {
            inner,
            width,
            height,
            chroma,
        })
    }

    pub fn write_frame(&mut self, frame: &GrayFrame) -> std::io::Result<()> {
        assert_eq!((frame.width(), frame.height()), (self.width, self.height));
        self.inner.write_all(b"FRAME\n")?;
        self.inner.write_all(frame.luma())?;
        let chroma = self.chroma.plane_bytes(self.width, self.height);
        if chroma > 0 {
            self.inner.write_all(&vec![128u8; chroma])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub fn write_y4m(path: &Path, frames: &[GrayFrame], chroma: Chroma) -> Result<()> {
    let first = frames
        .first()
        .ok_or_else(|| Error::NoFrames(path.to_path_buf()))?;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = Y4mWriter::new(
        std::io::BufWriter::new(file),
        first.width(),
        first.height(),
        chroma,
    )
    .map_err(|e| Error::io(path, e))?;
    for f in frames {
        w.write_frame(f).map_err(|e| Error::io(path, e))?;
    }
    w.finish().map_err(|e| Error::io(path, e))?;
    Ok(())
}
