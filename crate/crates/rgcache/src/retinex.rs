//! Illumination/reflectance split: smooth the lightness plane to estimate
//! illumination, then take the pixelwise log-ratio as reflectance,
//! `R = log10(A / I)`, so `A = I * 10^R` holds exactly wherever the ratio is
//! defined.
//!
//! Pixels with zero lightness carry no ratio information (and a zero
//! illumination estimate would divide by zero), so they are flagged invalid
//! and their reflectance is stored as 0; consumers treat them as flat.

use crate::color::ColorImage;
use crate::error::{Error, Result};
use crate::field::{LightnessMap, ScalarField};
use crate::smoothing::{Smoother, SmootherConfig};

#[derive(Debug, Clone)]
pub struct Decomposition {
    illumination: LightnessMap,
    reflectance: ScalarField,
    valid: Vec<bool>,
}

impl Decomposition {
    pub fn width(&self) -> usize {
        self.illumination.width()
    }

    pub fn height(&self) -> usize {
        self.illumination.height()
    }

    pub fn illumination(&self) -> &LightnessMap {
        &self.illumination
    }

    /// Signed log10 reflectance; 0 at invalid pixels.
    pub fn reflectance(&self) -> &ScalarField {
        &self.reflectance
    }

    /// Per-pixel flag: true where the log-ratio was defined.
    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// Decompose with the smoother described by `config`.
pub fn decompose(lightness: &LightnessMap, config: &SmootherConfig) -> Result<Decomposition> {
    decompose_with(lightness, config)
}

/// Decompose with any illumination estimator.
pub fn decompose_with(
    lightness: &LightnessMap,
    smoother: &dyn Smoother,
) -> Result<Decomposition> {
    let illumination = smoother.smooth(lightness)?;
    if illumination.width() != lightness.width() || illumination.height() != lightness.height() {
        return Err(Error::dims("smoother changed the image dimensions"));
    }

    let mut reflectance = Vec::with_capacity(lightness.len());
    let mut valid = Vec::with_capacity(lightness.len());
    for (&a, &i) in lightness.values().iter().zip(illumination.values()) {
        if a > 0.0 && i > 0.0 {
            reflectance.push((a / i).log10());
            valid.push(true);
        } else {
            reflectance.push(0.0);
            valid.push(false);
        }
    }

    Ok(Decomposition {
        reflectance: ScalarField::new(lightness.width(), lightness.height(), reflectance)?,
        illumination,
        valid,
    })
}

/// False-color rendering of the signed reflectance for the intermediate
/// dumps: positive values in red, negative in blue, invalid pixels in green.
/// Magnitudes are normalized by the 99th percentile over valid pixels so a
/// few extreme ratios do not flatten everything else to black.
pub fn render_reflectance_vis(decomposition: &Decomposition) -> ColorImage {
    let r = decomposition.reflectance.values();
    let valid = &decomposition.valid;

    let mut magnitudes: Vec<f64> = r
        .iter()
        .zip(valid)
        .filter(|(_, &ok)| ok)
        .map(|(&v, _)| v.abs())
        .collect();
    magnitudes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = if magnitudes.is_empty() {
        0.0
    } else {
        let rank = ((magnitudes.len() as f64 * 0.99).ceil() as usize)
            .clamp(1, magnitudes.len());
        let p99 = magnitudes[rank - 1];
        if p99 > 0.0 {
            1.0 / p99
        } else {
            0.0
        }
    };

    let pixels = r
        .iter()
        .zip(valid)
        .map(|(&v, &ok)| {
            if !ok {
                return [0.0, 1.0, 0.0];
            }
            let m = (v.abs() * scale).min(1.0);
            if v >= 0.0 {
                [m, 0.0, 0.0]
            } else {
                [0.0, 0.0, m]
            }
        })
        .collect();
    ColorImage::new(decomposition.width(), decomposition.height(), pixels)
        .expect("vis values are clamped to range")
}
