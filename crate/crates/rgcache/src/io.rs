//! File I/O. PNG through the `image` crate, binary PPM (P6) parsed by hand
//! since the format is a dozen lines and pulls in nothing.
//!
//! Reads accept 8- and 16-bit grayscale and RGB; samples are normalized to
//! `[0, 1]` by dividing by the type maximum (255 or 65535). Writes always
//! produce 8-bit RGB, rounding half away from zero.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::color::ColorImage;
use crate::error::{Error, Result};
use crate::field::LightnessMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Png,
    Ppm,
}

fn format_of(path: &Path) -> Result<Format> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(Format::Png),
        "ppm" => Ok(Format::Ppm),
        _ => Err(Error::UnsupportedFormat(format!(
            "{} (expected .png or .ppm)",
            path.display()
        ))),
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ColorImage> {
    let path = path.as_ref();
    match format_of(path)? {
        Format::Png => load_png(path),
        Format::Ppm => load_ppm(path),
    }
}

pub fn save_image(image: &ColorImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match format_of(path)? {
        Format::Png => save_png(image, path),
        Format::Ppm => save_ppm(image, path),
    }
}

/// Round a `[0, 1]` sample to 8 bits.
#[inline]
pub fn to_u8(v: f64) -> u8 {
    (v * 255.0).round().min(255.0) as u8
}

fn load_png(path: &Path) -> Result<ColorImage> {
    let dynamic = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::decode(path, other.to_string()),
    })?;
    let (width, height) = (dynamic.width() as usize, dynamic.height() as usize);
    let pixels: Vec<[f64; 3]> = match dynamic {
        image::DynamicImage::ImageLuma8(img) => img
            .pixels()
            .map(|p| {
                let v = p.0[0] as f64 / 255.0;
                [v, v, v]
            })
            .collect(),
        image::DynamicImage::ImageLuma16(img) => img
            .pixels()
            .map(|p| {
                let v = p.0[0] as f64 / 65535.0;
                [v, v, v]
            })
            .collect(),
        image::DynamicImage::ImageRgb8(img) => img
            .pixels()
            .map(|p| [p.0[0] as f64 / 255.0, p.0[1] as f64 / 255.0, p.0[2] as f64 / 255.0])
            .collect(),
        image::DynamicImage::ImageRgb16(img) => img
            .pixels()
            .map(|p| {
                [
                    p.0[0] as f64 / 65535.0,
                    p.0[1] as f64 / 65535.0,
                    p.0[2] as f64 / 65535.0,
                ]
            })
            .collect(),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: {:?} pixels (expected 8/16-bit gray or RGB)",
                path.display(),
                other.color()
            )))
        }
    };
    ColorImage::new(width, height, pixels)
}

fn save_png(image: &ColorImage, path: &Path) -> Result<()> {
    let mut out = image::RgbImage::new(image.width() as u32, image.height() as u32);
    for (dst, src) in out.pixels_mut().zip(image.pixels()) {
        dst.0 = [to_u8(src[0]), to_u8(src[1]), to_u8(src[2])];
    }
    out.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::decode(path, other.to_string()),
        })
}

fn load_ppm(path: &Path) -> Result<ColorImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_ppm(&bytes).map_err(|msg| Error::decode(path, msg))
}

fn parse_ppm(bytes: &[u8]) -> std::result::Result<ColorImage, String> {
    let mut pos = 0usize;

    // Header tokens are separated by whitespace; '#' starts a comment that
    // runs to end of line.
    let next_token = |pos: &mut usize| -> std::result::Result<Vec<u8>, String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err("truncated header".into());
        }
        Ok(bytes[start..*pos].to_vec())
    };

    let magic = next_token(&mut pos)?;
    if magic != b"P6" {
        return Err("not a P6 (binary RGB) PPM".into());
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        let tok = next_token(&mut pos)?;
        let s = std::str::from_utf8(&tok).map_err(|_| "non-ASCII header".to_string())?;
        *d = s.parse::<usize>().map_err(|_| format!("bad header field {s:?}"))?;
    }
    let [width, height, maxval] = dims;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range 1..=65535"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing raster separator".into());
    }
    pos += 1;

    let bytes_per_sample = if maxval > 255 { 2 } else { 1 };
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3 * bytes_per_sample))
        .ok_or("image dimensions overflow")?;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(format!(
            "raster truncated: {} bytes, expected {expected}",
            raster.len()
        ));
    }

    // Divide rather than multiply by a reciprocal so identical 8-bit data
    // loads bit-identically through the PNG and PPM paths.
    let max = maxval as f64;
    let mut pixels = Vec::with_capacity(width * height);
    if bytes_per_sample == 1 {
        for p in raster[..expected].chunks_exact(3) {
            pixels.push([p[0] as f64 / max, p[1] as f64 / max, p[2] as f64 / max]);
        }
    } else {
        // Two-byte samples are big-endian per the netpbm spec.
        for p in raster[..expected].chunks_exact(6) {
            let r = u16::from_be_bytes([p[0], p[1]]);
            let g = u16::from_be_bytes([p[2], p[3]]);
            let b = u16::from_be_bytes([p[4], p[5]]);
            if r as usize > maxval || g as usize > maxval || b as usize > maxval {
                return Err("sample exceeds maxval".into());
            }
            pixels.push([r as f64 / max, g as f64 / max, b as f64 / max]);
        }
    }
    ColorImage::new(width, height, pixels).map_err(|e| e.to_string())
}

fn save_ppm(image: &ColorImage, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + image.width() * image.height() * 3);
    write!(buf, "P6\n{} {}\n255\n", image.width(), image.height())
        .expect("write to Vec cannot fail");
    for p in image.pixels() {
        buf.push(to_u8(p[0]));
        buf.push(to_u8(p[1]));
        buf.push(to_u8(p[2]));
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Write a lightness plane as an 8-bit grayscale PNG.
pub fn save_grayscale(map: &LightnessMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = image::GrayImage::new(map.width() as u32, map.height() as u32);
    for (dst, &v) in out.pixels_mut().zip(map.values()) {
        dst.0 = [to_u8(v)];
    }
    out.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::decode(path, other.to_string()),
        })
}
