//! Binary PGM (P5) reading and writing.

use std::fs;
use std::path::Path;

use super::{Image, Mask};
use crate::error::{Error, Result};

/// Reads an 8- or 16-bit binary PGM and min-max normalizes it to `[0, 1]`.
///
/// Samples are first scaled by 1/255 (8-bit) or 1/65535 (16-bit). A constant
/// image normalizes to all zeros.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes).map_err(|reason| Error::ImageFormat {
        path: path.to_path_buf(),
        reason,
    })
}

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    data_offset: usize,
}

fn parse_header(bytes: &[u8]) -> std::result::Result<Header, String> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err("not a binary PGM (missing P5 magic)".into());
    }
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for field in &mut fields {
        // whitespace and comments between tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err("truncated header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(format!("expected a number in header at byte {start}"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| format!("header number {text} out of range"))?;
    }
    // exactly one whitespace byte separates header from raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err("missing whitespace after maxval".into()),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(format!("zero-area image ({width}x{height})"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("unsupported bit depth (maxval {maxval})"));
    }
    Ok(Header {
        width: width as usize,
        height: height as usize,
        maxval: maxval as u32,
        data_offset: pos,
    })
}

/// Decodes P5 bytes; see [`load_image`] for the normalization rule.
pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<Image, String> {
    let h = parse_header(bytes)?;
    let n = h
        .width
        .checked_mul(h.height)
        .ok_or_else(|| "image dimensions overflow".to_string())?;
    let raster = &bytes[h.data_offset..];
    let scaled: Vec<f64> = if h.maxval < 256 {
        if raster.len() < n {
            return Err(format!("raster truncated: {} of {n} bytes", raster.len()));
        }
        raster[..n].iter().map(|&b| f64::from(b) / 255.0).collect()
    } else {
        if raster.len() < 2 * n {
            return Err(format!("raster truncated: {} of {} bytes", raster.len(), 2 * n));
        }
        raster[..2 * n]
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) / 65535.0)
            .collect()
    };
    let (lo, hi) = scaled
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    let data = if range > 0.0 {
        scaled.iter().map(|&v| ((v - lo) / range) as f32).collect()
    } else {
        vec![0.0; n]
    };
    Ok(Image::from_raw_clamped(h.width, h.height, data))
}

#[inline]
fn quantize(v: f32, levels: f32) -> f32 {
    // f32::round rounds half away from zero
    (v.clamp(0.0, 1.0) * levels).round()
}

/// Encodes as 8-bit P5 with round-half-away-from-zero quantization.
pub fn encode_pgm8(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| quantize(v, 255.0) as u8));
    out
}

pub fn save_image_pgm8(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm8(img)).map_err(|e| Error::io(path, e))
}

/// 16-bit P5, big-endian samples.
pub fn save_image_pgm16(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P5\n{} {}\n65535\n", img.width(), img.height()).into_bytes();
    for &v in img.data() {
        out.extend_from_slice(&(quantize(v, 65535.0) as u16).to_be_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Masks are written as 8-bit P5 with values {0, 255}.
pub fn save_mask_pgm(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.data().iter().map(|&b| if b { 255u8 } else { 0 }));
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p5_8bit(w: usize, h: usize, px: &[u8]) -> Vec<u8> {
        let mut v = format!("P5\n# comment line\n{w} {h}\n255\n").into_bytes();
        v.extend_from_slice(px);
        v
    }

    #[test]
    fn eight_bit_linear_scaling() {
        let img = decode_pgm(&p5_8bit(2, 2, &[0, 100, 200, 255])).unwrap();
        let expect = [0.0, 100.0 / 255.0, 200.0 / 255.0, 1.0];
        for (a, b) in img.data().iter().zip(expect) {
            assert!((f64::from(*a) - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_file_maps_to_zero() {
        let img = decode_pgm(&p5_8bit(3, 1, &[77, 77, 77])).unwrap();
        assert_eq!(img.data(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn sixteen_bit_big_endian() {
        let mut v = b"P5 2 1 65535\n".to_vec();
        v.extend_from_slice(&[0x00, 0x10, 0xff, 0xff]);
        let img = decode_pgm(&v).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(decode_pgm(b"P2 1 1 255\n\x00").is_err());
        assert!(decode_pgm(b"P5 0 1 255\n").unwrap_err().contains("zero-area"));
        assert!(decode_pgm(b"P5 1 1 70000\n\x00\x00")
            .unwrap_err()
            .contains("bit depth"));
        assert!(decode_pgm(b"P5 2 2 255\n\x00").unwrap_err().contains("truncated"));
    }

    #[test]
    fn quantization_rounds_half_away() {
        // 0.5 * 255 = 127.5 -> 128
        let img = Image::new(2, 1, vec![0.5, 1.0]).unwrap();
        let bytes = encode_pgm8(&img);
        assert_eq!(&bytes[bytes.len() - 2..], &[128, 255]);
    }

    #[test]
    fn load_twice_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        fs::write(&p, p5_8bit(2, 2, &[3, 9, 27, 81])).unwrap();
        assert_eq!(load_image(&p).unwrap(), load_image(&p).unwrap());
        assert!(matches!(
            load_image(dir.path().join("missing.pgm")),
            Err(Error::Io { .. })
        ));
    }
}
