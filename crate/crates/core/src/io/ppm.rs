use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::write_atomic;

fn format_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}

/// A decoded P6 file: the original header bytes plus the pixels as a
/// `1×3×H×W` tensor in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageFile {
    pub header: Vec<u8>,
    pub pixels: Tensor,
}

impl ImageFile {
    /// Wraps a tensor under the canonical header `P6 <w> <h> 255\n`.
    pub fn new(pixels: Tensor) -> Result<Self> {
        check_rgb(&pixels)?;
        let header = format!("P6 {} {} 255\n", pixels.width(), pixels.height()).into_bytes();
        Ok(ImageFile { header, pixels })
    }

    pub fn read(path: &Path) -> Result<Self> {
        decode_ppm(&fs::read(path)?)
    }

    /// Header bytes as read, followed by the quantized pixels.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        check_rgb(&self.pixels)?;
        let mut out = self.header.clone();
        out.extend(quantize_pixels(&self.pixels));
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes()?)
    }
}

fn check_rgb(t: &Tensor) -> Result<()> {
    if t.batch() != 1 || t.channels() != 3 {
        return format_err(format!("PPM holds one RGB image, got shape {:?}", t.shape()));
    }
    Ok(())
}

/// Clamp to `[0, 1]`, then round half up: `floor(v · 255 + 0.5)`.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

fn quantize_pixels(t: &Tensor) -> Vec<u8> {
    let (h, w) = (t.height(), t.width());
    let mut out = Vec::with_capacity(3 * h * w);
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                out.push(quantize(t.at(0, c, y, x)));
            }
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    /// Skips whitespace and `#` comments, then reads a decimal field.
    fn field(&mut self, what: &str) -> Result<usize> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return format_err(format!("missing {what} in header"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map_or_else(|| format_err(format!("{what} out of range")), Ok)
    }
}

pub fn decode_ppm(bytes: &[u8]) -> Result<ImageFile> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return format_err("not a binary PPM (missing P6 magic)");
    }
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return format_err("malformed header after P6");
    }
    let width = cur.field("width")?;
    let height = cur.field("height")?;
    let maxval = cur.field("maxval")?;
    if maxval != 255 {
        return format_err(format!("maxval {maxval} unsupported, expected 255"));
    }
    if width == 0 || height == 0 {
        return format_err("zero image extent");
    }
    match cur.bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return format_err("header must end with one whitespace byte"),
    }
    let header = bytes[..cur.pos].to_vec();
    let payload = &bytes[cur.pos..];
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::Format("image extent overflow".into()))?;
    if payload.len() < need {
        return format_err(format!("truncated payload: {} of {need} bytes", payload.len()));
    }
    if payload.len() > need {
        return format_err(format!("{} trailing bytes after payload", payload.len() - need));
    }
    let mut data = vec![0.0; need];
    let plane = width * height;
    for (i, px) in payload.chunks_exact(3).enumerate() {
        for c in 0..3 {
            data[c * plane + i] = px[c] as f64 / 255.0;
        }
    }
    Ok(ImageFile {
        header,
        pixels: Tensor::from_vec([1, 3, height, width], data)?,
    })
}

pub fn encode_ppm(t: &Tensor) -> Result<Vec<u8>> {
    ImageFile::new(t.clone())?.to_bytes()
}

pub fn read_image(path: &Path) -> Result<Tensor> {
    Ok(ImageFile::read(path)?.pixels)
}

/// Clamps, quantizes and writes `t` (shape `1×3×H×W`) atomically.
pub fn write_image(path: &Path, t: &Tensor) -> Result<()> {
    write_atomic(path, &encode_ppm(t)?)
}
