//! Binary PPM (P6) and PGM (P5) decoding, 8-bit only.

use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{rgb_to_luma, GrayFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetpbmKind {
    Pgm,
    Ppm,
}

impl NetpbmKind {
    fn channels(self) -> usize {
        match self {
            NetpbmKind::Pgm => 1,
            NetpbmKind::Ppm => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetpbmHeader {
    pub kind: NetpbmKind,
    pub width: usize,
    pub height: usize,
    /// Byte offset of the first pixel.
    pub data_offset: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl Cursor<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Header {
            path: self.path.to_path_buf(),
            offset: self.pos as u64,
            msg: msg.into(),
        }
    }

    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn read_unsigned(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        let mut value: usize = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as usize))
                .ok_or_else(|| self.err(format!("{what} overflows")))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(format!("expected {what}")));
        }
        Ok(value)
    }
}

pub fn parse_header(bytes: &[u8], path: &Path) -> Result<NetpbmHeader> {
    let mut cur = Cursor {
        bytes,
        pos: 0,
        path,
    };
    let kind = match bytes.get(..2) {
        Some(b"P5") => NetpbmKind::Pgm,
        Some(b"P6") => NetpbmKind::Ppm,
        Some([b'P', b'1'..=b'7']) => {
            return Err(Error::Unsupported {
                path: path.to_path_buf(),
                msg: format!("netpbm variant {}", String::from_utf8_lossy(&bytes[..2])),
            })
        }
        _ => return Err(cur.err("missing P5/P6 magic")),
    };
    cur.pos = 2;
    let width = cur.read_unsigned("width")?;
    let height = cur.read_unsigned("height")?;
    let maxval = cur.read_unsigned("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.err(format!("zero dimension {width}x{height}")));
    }
    if maxval != 255 {
        return Err(Error::Unsupported {
            path: path.to_path_buf(),
            msg: format!("maxval {maxval} (only 255 is supported)"),
        });
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(cur.err("expected single whitespace after maxval")),
    }
    Ok(NetpbmHeader {
        kind,
        width,
        height,
        data_offset: cur.pos,
    })
}

/// Decodes a P5 or P6 image to luma.
pub fn decode(bytes: &[u8], path: &Path) -> Result<GrayFrame> {
    let header = parse_header(bytes, path)?;
    let pixels = header.width * header.height;
    let expected = pixels * header.kind.channels();
    let payload = &bytes[header.data_offset..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            frame: 0,
            expected,
            available: payload.len(),
        });
    }
    let luma = match header.kind {
        NetpbmKind::Pgm => payload[..expected].to_vec(),
        NetpbmKind::Ppm => payload[..expected]
            .chunks_exact(3)
            .map(|px| rgb_to_luma(px[0], px[1], px[2]))
            .collect(),
    };
    GrayFrame::new(header.width, header.height, luma)
}

pub fn read_image(path: impl AsRef<Path>) -> Result<GrayFrame> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

/// Encodes RGB triples as P6.
pub fn encode_ppm(width: usize, height: usize, rgb: &[u8]) -> Vec<u8> {
    assert_eq!(rgb.len(), width * height * 3);
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(rgb);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn decodes_ppm_luma() {
        let bytes = encode_ppm(2, 1, &[255, 255, 255, 255, 0, 0]);
        let f = decode(&bytes, p()).unwrap();
        assert_eq!(f.luma(), &[255, 76]);
    }

    #[test]
    fn pgm_passthrough_with_comments() {
        let mut bytes = b"P5\n# a comment\n2 # trailing\n1\n255\n".to_vec();
        bytes.extend_from_slice(&[7, 200]);
        let f = decode(&bytes, p()).unwrap();
        assert_eq!((f.width(), f.height()), (2, 1));
        assert_eq!(f.luma(), &[7, 200]);
    }

    #[test]
    fn pgm_round_trip() {
        let f = GrayFrame::from_fn(5, 3, |x, y| (x * 40 + y * 7) as u8);
        let back = decode(&f.to_pgm(), p()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn header_errors_carry_offsets() {
        match decode(b"P5\n4 x\n255\n", p()) {
            Err(Error::Header { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            decode(b"XX", p()),
            Err(Error::Header { offset: 0, .. })
        ));
        assert!(matches!(
            decode(b"P5\n1 1\n65535\n\0\0", p()),
            Err(Error::Unsupported { .. })
        ));
        assert!(matches!(
            decode(b"P2\n1 1\n255\n0", p()),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn truncated_payload() {
        match decode(b"P6\n2 2\n255\n\0\0\0", p()) {
            Err(Error::Truncated {
                expected,
                available,
                ..
            }) => assert_eq!((expected, available), (12, 3)),
            other => panic!("{other:?}"),
        }
    }
}
