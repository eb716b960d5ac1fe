//! Image decoding and canonical 8-bit grayscale representation.
//!
//! Every metric in this crate operates on a [`GrayImage`]: a row-major
//! buffer of 8-bit intensities. PNG and binary PGM (P5) inputs are
//! converted to this form on load; color is collapsed with BT.601 luma
//! weights and 16-bit samples are scaled down by 1/257. All rounding is
//! half away from zero so results are bit-reproducible.

use std::fmt;
use std::path::Path;

use sha2::{Digest as _, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("unsupported format (expected PNG or binary PGM): {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image {path}: {detail}")]
    CorruptImage { path: String, detail: String },
    #[error("zero image dimension")]
    ZeroDimension,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// 8-bit single-channel raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::ZeroDimension);
        }
        assert_eq!(pixels.len(), width * height, "pixel buffer length mismatch");
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn constant(width: usize, height: usize, value: u8) -> Result<Self, ImagingError> {
        Self::new(width, height, vec![value; width * height])
    }
}

/// 256-bit digest of the canonical pixel buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContentHash(pub [u8; 32]);

impl ContentHash {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let bytes = hex::decode(s).ok()?;
        let arr: [u8; 32] = bytes.try_into().ok()?;
        Some(Self(arr))
    }
}

impl fmt::Display for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Round half away from zero. `f64::round` already has these semantics;
/// named here so the convention is explicit at call sites.
#[inline]
pub(crate) fn round_half_away(x: f64) -> f64 {
    x.round()
}

fn luma8(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    round_half_away(y).clamp(0.0, 255.0) as u8
}

fn luma16(r: u16, g: u16, b: u16) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    round_half_away(y / 257.0).clamp(0.0, 255.0) as u8
}

fn scale16(v: u16) -> u8 {
    round_half_away(f64::from(v) / 257.0).clamp(0.0, 255.0) as u8
}

/// Decode a PNG or binary PGM file into the canonical grayscale form.
pub fn load_grayscale(path: &Path) -> Result<GrayImage, ImagingError> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(ImagingError::FileNotFound(path.display().to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(path, &bytes)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(path, &bytes)
    } else {
        Err(ImagingError::UnsupportedFormat(path.display().to_string()))
    }
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    use image::DynamicImage;
    let dyn_img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(
        |e| ImagingError::CorruptImage {
            path: path.display().to_string(),
            detail: e.to_string(),
        },
    )?;
    let (w, h) = (dyn_img.width() as usize, dyn_img.height() as usize);
    if w == 0 || h == 0 {
        return Err(ImagingError::ZeroDimension);
    }
    let pixels: Vec<u8> = match dyn_img {
        DynamicImage::ImageLuma8(img) => img.into_raw(),
        DynamicImage::ImageLumaA8(img) => img.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageLuma16(img) => img.pixels().map(|p| scale16(p.0[0])).collect(),
        DynamicImage::ImageLumaA16(img) => img.pixels().map(|p| scale16(p.0[0])).collect(),
        DynamicImage::ImageRgb8(img) => {
            img.pixels().map(|p| luma8(p.0[0], p.0[1], p.0[2])).collect()
        }
        DynamicImage::ImageRgba8(img) => {
            img.pixels().map(|p| luma8(p.0[0], p.0[1], p.0[2])).collect()
        }
        DynamicImage::ImageRgb16(img) => {
            img.pixels().map(|p| luma16(p.0[0], p.0[1], p.0[2])).collect()
        }
        DynamicImage::ImageRgba16(img) => {
            img.pixels().map(|p| luma16(p.0[0], p.0[1], p.0[2])).collect()
        }
        other => {
            let rgb = other.into_rgb8();
            rgb.pixels().map(|p| luma8(p.0[0], p.0[1], p.0[2])).collect()
        }
    };
    GrayImage::new(w, h, pixels)
}

fn decode_pgm(path: &Path, bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    let corrupt = |detail: &str| ImagingError::CorruptImage {
        path: path.display().to_string(),
        detail: detail.to_string(),
    };
    let mut pos = 2; // past "P5"
    let next_token = |pos: &mut usize| -> Result<u64, ImagingError> {
        // skip whitespace and '#' comments
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(corrupt("malformed PGM header token"));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| corrupt("malformed PGM header token"))
    };
    let width = next_token(&mut pos)? as usize;
    let height = next_token(&mut pos)? as usize;
    let maxval = next_token(&mut pos)?;
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(corrupt("missing raster separator"));
    }
    pos += 1;
    if width == 0 || height == 0 {
        return Err(ImagingError::ZeroDimension);
    }
    let n = width * height;
    let pixels = match maxval {
        255 => {
            let raster = bytes.get(pos..pos + n).ok_or_else(|| corrupt("truncated raster"))?;
            raster.to_vec()
        }
        65535 => {
            let raster =
                bytes.get(pos..pos + 2 * n).ok_or_else(|| corrupt("truncated raster"))?;
            raster
                .chunks_exact(2)
                .map(|c| scale16(u16::from_be_bytes([c[0], c[1]])))
                .collect()
        }
        _ => return Err(corrupt("unsupported PGM maxval (expected 255 or 65535)")),
    };
    GrayImage::new(width, height, pixels)
}

/// Bilinear resize with half-pixel-center coordinate mapping.
pub fn resize_bilinear(
    img: &GrayImage,
    target_w: usize,
    target_h: usize,
) -> Result<GrayImage, ImagingError> {
    if target_w == 0 || target_h == 0 {
        return Err(ImagingError::ZeroDimension);
    }
    if target_w == img.width && target_h == img.height {
        return Ok(img.clone());
    }
    let sx = img.width as f64 / target_w as f64;
    let sy = img.height as f64 / target_h as f64;
    let mut out = Vec::with_capacity(target_w * target_h);
    for oy in 0..target_h {
        let src_y = ((oy as f64 + 0.5) * sy - 0.5).clamp(0.0, (img.height - 1) as f64);
        let y0 = src_y.floor() as usize;
        let y1 = (y0 + 1).min(img.height - 1);
        let fy = src_y - y0 as f64;
        for ox in 0..target_w {
            let src_x = ((ox as f64 + 0.5) * sx - 0.5).clamp(0.0, (img.width - 1) as f64);
            let x0 = src_x.floor() as usize;
            let x1 = (x0 + 1).min(img.width - 1);
            let fx = src_x - x0 as f64;
            let top = f64::from(img.get(x0, y0)) * (1.0 - fx) + f64::from(img.get(x1, y0)) * fx;
            let bot = f64::from(img.get(x0, y1)) * (1.0 - fx) + f64::from(img.get(x1, y1)) * fx;
            let v = top * (1.0 - fy) + bot * fy;
            out.push(round_half_away(v).clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(target_w, target_h, out)
}

/// Digest over (width u64 LE, height u64 LE, pixels row-major).
pub fn content_hash(img: &GrayImage) -> ContentHash {
    let mut hasher = Sha256::new();
    hasher.update((img.width as u64).to_le_bytes());
    hasher.update((img.height as u64).to_le_bytes());
    hasher.update(&img.pixels);
    ContentHash(hasher.finalize().into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_pgm8(path: &Path, w: usize, h: usize, pixels: &[u8]) {
        let mut f = std::fs::File::create(path).unwrap();
        write!(f, "P5\n{} {}\n255\n", w, h).unwrap();
        f.write_all(pixels).unwrap();
    }

    #[test]
    fn luma_weights_match_hand_arithmetic() {
        assert_eq!(luma8(255, 255, 255), 255);
        // round(0.299 * 255) = round(76.245) = 76
        assert_eq!(luma8(255, 0, 0), 76);
        assert_eq!(luma8(0, 0, 0), 0);
    }

    #[test]
    fn png_rgb_converts_with_luma_weights() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("red.png");
        let mut rgb = image::RgbImage::new(2, 1);
        rgb.put_pixel(0, 0, image::Rgb([255, 0, 0]));
        rgb.put_pixel(1, 0, image::Rgb([255, 255, 255]));
        rgb.save(&path).unwrap();
        let img = load_grayscale(&path).unwrap();
        assert_eq!(img.pixels(), &[76, 255]);
    }

    #[test]
    fn pgm_roundtrip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.pgm");
        let pixels: Vec<u8> = (0..=255).collect();
        write_pgm8(&path, 16, 16, &pixels);
        let img = load_grayscale(&path).unwrap();
        assert_eq!(img.width(), 16);
        assert_eq!(img.height(), 16);
        assert_eq!(img.pixels(), &pixels[..]);
    }

    #[test]
    fn pgm_16bit_scales_by_257() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g16.pgm");
        let mut f = std::fs::File::create(&path).unwrap();
        write!(f, "P5\n2 1\n65535\n").unwrap();
        f.write_all(&65535u16.to_be_bytes()).unwrap();
        f.write_all(&257u16.to_be_bytes()).unwrap();
        drop(f);
        let img = load_grayscale(&path).unwrap();
        assert_eq!(img.pixels(), &[255, 1]);
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        let mut f = std::fs::File::create(&path).unwrap();
        write!(f, "P5\n# a comment\n2 # inline\n1\n255\n").unwrap();
        f.write_all(&[10, 20]).unwrap();
        drop(f);
        let img = load_grayscale(&path).unwrap();
        assert_eq!(img.pixels(), &[10, 20]);
    }

    #[test]
    fn unsupported_and_missing_files_error() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.png");
        assert!(matches!(load_grayscale(&missing), Err(ImagingError::FileNotFound(_))));
        let bad = dir.path().join("bad.bin");
        std::fs::write(&bad, b"not an image").unwrap();
        assert!(matches!(load_grayscale(&bad), Err(ImagingError::UnsupportedFormat(_))));
        let corrupt = dir.path().join("trunc.pgm");
        std::fs::write(&corrupt, b"P5\n4 4\n255\nxx").unwrap();
        assert!(matches!(load_grayscale(&corrupt), Err(ImagingError::CorruptImage { .. })));
    }

    #[test]
    fn resize_constant_stays_constant() {
        let img = GrayImage::constant(7, 3, 42).unwrap();
        let out = resize_bilinear(&img, 512, 512).unwrap();
        assert!(out.pixels().iter().all(|&p| p == 42));
    }

    #[test]
    fn resize_identity_is_bit_exact() {
        let pixels: Vec<u8> = (0..64).map(|i| (i * 37 % 256) as u8).collect();
        let img = GrayImage::new(8, 8, pixels.clone()).unwrap();
        let out = resize_bilinear(&img, 8, 8).unwrap();
        assert_eq!(out.pixels(), &pixels[..]);
    }

    #[test]
    fn resize_2x1_to_4x1_matches_hand_oracle() {
        // src centers at x = 0, 1; dst samples at src_x = -0.25, 0.25, 0.75, 1.25
        // clamped: 0 -> 0; 0.25 -> 63.75 -> 64; 0.75 -> 191.25 -> 191; 1 -> 255
        let img = GrayImage::new(2, 1, vec![0, 255]).unwrap();
        let out = resize_bilinear(&img, 4, 1).unwrap();
        assert_eq!(out.pixels(), &[0, 64, 191, 255]);
    }

    #[test]
    fn resize_preserves_value_range() {
        let pixels: Vec<u8> = (0..100).map(|i| (i * 53 % 200 + 20) as u8).collect();
        let img = GrayImage::new(10, 10, pixels.clone()).unwrap();
        let lo = *pixels.iter().min().unwrap();
        let hi = *pixels.iter().max().unwrap();
        let out = resize_bilinear(&img, 23, 17).unwrap();
        assert!(out.pixels().iter().all(|&p| p >= lo && p <= hi));
    }

    #[test]
    fn content_hash_is_pure_and_discriminating() {
        let a = GrayImage::new(3, 1, vec![1, 2, 3]).unwrap();
        let b = GrayImage::new(3, 1, vec![1, 2, 3]).unwrap();
        assert_eq!(content_hash(&a), content_hash(&b));
        let mirrored = GrayImage::new(3, 1, vec![3, 2, 1]).unwrap();
        assert_ne!(content_hash(&a), content_hash(&mirrored));
        let z = GrayImage::new(1, 1, vec![0]).unwrap();
        let o = GrayImage::new(1, 1, vec![1]).unwrap();
        assert_ne!(content_hash(&z), content_hash(&o));
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(GrayImage::new(0, 5, vec![]), Err(ImagingError::ZeroDimension)));
        let img = GrayImage::constant(2, 2, 0).unwrap();
        assert!(matches!(resize_bilinear(&img, 0, 4), Err(ImagingError::ZeroDimension)));
    }
}
