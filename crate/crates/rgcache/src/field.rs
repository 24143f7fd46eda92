//! Scalar grids: the unconstrained [`ScalarField`] and the range-checked
//! [`LightnessMap`] that most of the pipeline passes around.

use crate::error::{Error, Result};

/// Row-major `f64` grid with no range constraint. Used for reflectance
/// (signed log-domain values), finite differences, and pyramid levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg("field dimensions must be non-zero"));
        }
        if values.len() != width * height {
            return Err(Error::dims(format!(
                "field data length {} does not match {}x{}",
                values.len(),
                width,
                height
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("field values must be finite"));
        }
        Ok(ScalarField {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        ScalarField::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        ScalarField::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // dimensions are validated non-zero
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.values[y * self.width + x]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Lightness plane with every value in `[0, 1]`. Enforced at construction so
/// downstream quantization can rely on it.
#[derive(Debug, Clone, PartialEq)]
pub struct LightnessMap {
    field: ScalarField,
}

impl LightnessMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        LightnessMap::from_field(ScalarField::new(width, height, values)?)
    }

    pub fn from_field(field: ScalarField) -> Result<Self> {
        if field.values().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::arg("lightness values must lie in [0, 1]"));
        }
        Ok(LightnessMap { field })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        LightnessMap::from_field(ScalarField::filled(width, height, value)?)
    }

    pub fn width(&self) -> usize {
        self.field.width()
    }

    pub fn height(&self) -> usize {
        self.field.height()
    }

    pub fn len(&self) -> usize {
        self.field.len()
    }

    pub fn is_empty(&self) -> bool {
        false
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

    pub fn min_value(&self) -> f64 {
        self.field.min_value()
    }

    pub fn max_value(&self) -> f64 {
        self.field.max_value()
    }
}
