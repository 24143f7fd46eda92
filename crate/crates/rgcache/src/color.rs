//! RGB images in linear `[0, 1]` per channel, plus the lightness extraction
//! and hue-preserving reconstruction that bracket the enhancement pipeline.
//!
//! Lightness is the per-pixel channel maximum. Reconstruction rescales each
//! channel by `a_out / a_in`, which keeps channel ratios (and thus hue and
//! saturation) intact; pixels with zero input lightness carry no chroma
//! information and are written as neutral gray at the output lightness.

use crate::error::{Error, Result};
use crate::field::LightnessMap;

#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg("image dimensions must be non-zero"));
        }
        if pixels.len() != width * height {
            return Err(Error::dims(format!(
                "pixel data length {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        for p in &pixels {
            for &c in p {
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::arg("channel values must lie in [0, 1]"));
                }
            }
        }
        Ok(ColorImage {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        ColorImage::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }
}

/// Per-pixel channel maximum. The result lives in `[0, 1]` like the input.
pub fn lightness_of(image: &ColorImage) -> LightnessMap {
    let values = image
        .pixels
        .iter()
        .map(|&[r, g, b]| r.max(g).max(b))
        .collect();
    // Max of in-range channels is in range, so this cannot fail.
    LightnessMap::new(image.width, image.height, values).expect("channel max stays in [0, 1]")
}

/// Rescale every channel of `c_in` so the resulting lightness equals `a_out`.
///
/// Requires `a_in == lightness_of(c_in)`; passing anything else is rejected
/// rather than silently producing out-of-range channels. Where `a_in` is zero
/// the input pixel is pure black and the output is the achromatic pixel
/// `[a_out, a_out, a_out]`.
pub fn reconstruct_color(
    c_in: &ColorImage,
    a_in: &LightnessMap,
    a_out: &LightnessMap,
) -> Result<ColorImage> {
    if a_in.width() != c_in.width || a_in.height() != c_in.height {
        return Err(Error::dims("input lightness does not match image"));
    }
    if a_out.width() != c_in.width || a_out.height() != c_in.height {
        return Err(Error::dims("output lightness does not match image"));
    }
    let mut pixels = Vec::with_capacity(c_in.pixels.len());
    for (p, (&ai, &ao)) in c_in
        .pixels
        .iter()
        .zip(a_in.values().iter().zip(a_out.values()))
    {
        if p.iter().any(|&c| c > ai + 1e-9) {
            return Err(Error::arg(
                "input lightness is inconsistent with the image (channel exceeds it)",
            ));
        }
        if ai == 0.0 {
            pixels.push([ao, ao, ao]);
        } else {
            // c/ai <= 1 up to the tolerance above; clamp shields the [0,1]
            // invariant against that last 1e-9.
            pixels.push([
                (p[0] / ai * ao).min(1.0),
                (p[1] / ai * ao).min(1.0),
                (p[2] / ai * ao).min(1.0),
            ]);
        }
    }
    ColorImage::new(c_in.width, c_in.height, pixels)
}
