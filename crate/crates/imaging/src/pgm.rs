//! Grayscale PGM reading (P2 and P5) and writing (P5).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{ImagingError, Result};
use crate::Image;

fn tokens(data: &[u8], count: usize) -> Result<(Vec<usize>, usize)> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count {
        while i < data.len() && (data[i].is_ascii_whitespace() || data[i] == b'#') {
            if data[i] == b'#' {
                while i < data.len() && data[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < data.len() && data[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return Err(ImagingError::Pgm(format!("expected a number at byte {start}")));
        }
        let text = std::str::from_utf8(&data[start..i]).expect("ascii digits");
        out.push(text.parse().map_err(|_| ImagingError::Pgm(format!("number `{text}` out of range")))?);
    }
    Ok((out, i))
}

/// Parses a PGM byte stream, rescaling samples to `[0, 255]`.
pub fn parse_pgm(data: &[u8]) -> Result<Image> {
    let binary = match data.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(ImagingError::Pgm("missing P2/P5 magic".into())),
    };
    let (header, end) = tokens(&data[2..], 3)?;
    let (cols, rows, maxval) = (header[0], header[1], header[2]);
    if cols == 0 || rows == 0 || maxval == 0 || maxval > 65535 {
        return Err(ImagingError::Pgm(format!("bad header {cols}x{rows} maxval {maxval}")));
    }
    let n = rows * cols;
    let scale = 255.0 / maxval as f64;
    let raw: Vec<usize> = if binary {
        let body = data.get(2 + end + 1..).unwrap_or(&[]);
        let width = if maxval < 256 { 1 } else { 2 };
        if body.len() < n * width {
            return Err(ImagingError::Pgm(format!("expected {} sample bytes, found {}", n * width, body.len())));
        }
        (0..n)
            .map(|i| match width {
                1 => body[i] as usize,
                _ => (body[2 * i] as usize) << 8 | body[2 * i + 1] as usize,
            })
            .collect()
    } else {
        tokens(&data[2 + end..], n)?.0
    };
    if let Some(v) = raw.iter().find(|&&v| v > maxval) {
        return Err(ImagingError::Pgm(format!("sample {v} exceeds maxval {maxval}")));
    }
    Image::new(rows, cols, raw.into_iter().map(|v| v as f64 * scale).collect())
}

pub fn read_pgm(path: &Path) -> Result<Image> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    parse_pgm(&data)
}

/// Encodes as 8-bit P5, rounding and clamping to `[0, 255]`.
pub fn encode_pgm(image: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.cols, image.rows).into_bytes();
    out.extend(image.pixels.iter().map(|v| v.round().clamp(0.0, 255.0) as u8));
    out
}

pub fn write_pgm(path: &Path, image: &Image) -> Result<()> {
    std::fs::File::create(path)?.write_all(&encode_pgm(image))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_with_comments() {
        let img = parse_pgm(b"P2\n# comment\n3 2\n# another\n255\n0 1 2\n3 4 255\n").unwrap();
        assert_eq!((img.rows, img.cols), (2, 3));
        assert_eq!(img.pixels, vec![0.0, 1.0, 2.0, 3.0, 4.0, 255.0]);
    }

    #[test]
    fn maxval_is_rescaled() {
        let img = parse_pgm(b"P2 2 1 15 0 15").unwrap();
        assert_eq!(img.pixels, vec![0.0, 255.0]);
    }

    #[test]
    fn binary_roundtrip() {
        let img = Image::new(2, 2, vec![0.0, 17.0, 128.0, 255.0]).unwrap();
        assert_eq!(parse_pgm(&encode_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_pgm(b"P6 1 1 255 0").is_err());
        assert!(parse_pgm(b"P2 2 2 255 1 2 3").is_err());
        assert!(parse_pgm(b"P2 1 1 10 11").is_err());
        assert!(parse_pgm(b"P5 2 2 255\n\x00").is_err());
    }
}
