//! Gradient-derived histogram weights.
//!
//! Each pixel's weight is the sum of absolute differences to its 4-connected
//! neighbours, computed at several pyramid scales and merged by geometric
//! mean, so both fine texture and coarse structure vote for the gray levels
//! they occupy. A strictly positive floor keeps flat regions from dropping
//! out of the histogram entirely (and keeps the weighted histogram well
//! defined on constant images).

use crate::error::{Error, Result};
use crate::field::{LightnessMap, ScalarField};
use crate::resample::resize_bicubic;
use crate::retinex::Decomposition;

/// Default weight floor. Exactly 2^-20 (~9.54e-7): a power of two, so the
/// all-flat case multiplies every histogram mass by the same dyadic factor
/// and the weighted histogram stays bit-identical to the unweighted one.
pub const DEFAULT_EPS_PHI: f64 = 9.5367431640625e-7;

pub const DEFAULT_LEVELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyramidConfig {
    /// Number of pyramid levels requested; undersized levels are dropped.
    pub levels: usize,
    /// Floor for gradient weights.
    pub eps_phi: f64,
}

impl Default for PyramidConfig {
    fn default() -> Self {
        PyramidConfig {
            levels: DEFAULT_LEVELS,
            eps_phi: DEFAULT_EPS_PHI,
        }
    }
}

impl PyramidConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::arg("pyramid needs at least one level"));
        }
        if !(self.eps_phi > 0.0 && self.eps_phi.is_finite()) {
            return Err(Error::arg("weight floor must be positive"));
        }
        Ok(())
    }
}

/// Strictly positive per-pixel weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    field: ScalarField,
}

impl WeightMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        WeightMap::from_field(ScalarField::new(width, height, values)?)
    }

    pub fn from_field(field: ScalarField) -> Result<Self> {
        if field.values().iter().any(|&v| v <= 0.0) {
            return Err(Error::arg("weights must be strictly positive"));
        }
        Ok(WeightMap { field })
    }

    pub fn uniform(width: usize, height: usize, value: f64) -> Result<Self> {
        WeightMap::from_field(ScalarField::filled(width, height, value)?)
    }

    pub fn width(&self) -> usize {
        self.field.width()
    }

    pub fn height(&self) -> usize {
        self.field.height()
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.field.at(x, y)
    }

    pub fn as_field(&self) -> &ScalarField {
        &self.field
    }
}

/// Sum of absolute 4-neighbour differences, floored at `eps_phi`. Border
/// pixels sum over the neighbours that exist.
pub fn local_gradient(field: &ScalarField, eps_phi: f64) -> Result<WeightMap> {
    if !(eps_phi > 0.0) {
        return Err(Error::arg("weight floor must be positive"));
    }
    let (w, h) = (field.width(), field.height());
    let v = field.values();
    let mut phi = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            let mut acc = 0.0;
            if x > 0 {
                acc += (v[p] - v[p - 1]).abs();
            }
            if x + 1 < w {
                acc += (v[p] - v[p + 1]).abs();
            }
            if y > 0 {
                acc += (v[p] - v[p - w]).abs();
            }
            if y + 1 < h {
                acc += (v[p] - v[p + w]).abs();
            }
            phi[p] = acc.max(eps_phi);
        }
    }
    WeightMap::new(w, h, phi)
}

/// Bicubic pyramid with ceil-halved dimensions. Level 0 is the input itself;
/// construction stops early once another halving would push a dimension
/// below 2, so at least one level always remains.
pub fn build_pyramid(field: &ScalarField, levels: usize) -> Result<Vec<ScalarField>> {
    if levels == 0 {
        return Err(Error::arg("pyramid needs at least one level"));
    }
    let mut pyramid = vec![field.clone()];
    while pyramid.len() < levels {
        let last = pyramid.last().unwrap();
        let next_w = last.width().div_ceil(2);
        let next_h = last.height().div_ceil(2);
        if next_w < 2 || next_h < 2 {
            break;
        }
        pyramid.push(resize_bicubic(last, next_w, next_h));
    }
    Ok(pyramid)
}

/// Pixel-wise geometric mean of the maps, after bicubic upsampling to the
/// target size. Interpolation overshoot below the floor is clamped back to
/// it, so the result is strictly positive. A single map is returned as-is
/// (up to the same resize and clamp).
pub fn merge_geometric(
    maps: &[WeightMap],
    width: usize,
    height: usize,
    eps_phi: f64,
) -> Result<WeightMap> {
    if maps.is_empty() {
        return Err(Error::arg("nothing to merge"));
    }
    if !(eps_phi > 0.0) {
        return Err(Error::arg("weight floor must be positive"));
    }

    let resized: Vec<ScalarField> = maps
        .iter()
        .map(|m| {
            let mut f = resize_bicubic(m.as_field(), width, height);
            for v in f.values_mut() {
                *v = v.max(eps_phi);
            }
            f
        })
        .collect();

    if resized.len() == 1 {
        return WeightMap::from_field(resized.into_iter().next().unwrap());
    }

    let root = 1.0 / resized.len() as f64;
    let mut merged = vec![0.0f64; width * height];
    for (p, slot) in merged.iter_mut().enumerate() {
        let mut product = 1.0;
        for f in &resized {
            product *= f.values()[p];
        }
        *slot = product.powf(root).max(eps_phi);
    }
    WeightMap::new(width, height, merged)
}

/// Multi-scale gradient weights of the reflectance plane: the weights the
/// full pipeline feeds into the histogram.
pub fn reflectance_weights(
    decomposition: &Decomposition,
    config: &PyramidConfig,
) -> Result<WeightMap> {
    multi_scale_gradient(decomposition.reflectance(), config)
}

/// Same construction applied directly to lightness; this is what the
/// plain contrast-accumulated variant uses.
pub fn intensity_weights(lightness: &LightnessMap, config: &PyramidConfig) -> Result<WeightMap> {
    multi_scale_gradient(lightness.as_field(), config)
}

fn multi_scale_gradient(field: &ScalarField, config: &PyramidConfig) -> Result<WeightMap> {
    config.validate()?;
    let pyramid = build_pyramid(field, config.levels)?;
    let per_level: Vec<WeightMap> = pyramid
        .iter()
        .map(|level| local_gradient(level, config.eps_phi))
        .collect::<Result<_>>()?;
    merge_geometric(&per_level, field.width(), field.height(), config.eps_phi)
}
