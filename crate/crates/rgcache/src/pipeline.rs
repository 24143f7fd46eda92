//! End-to-end enhancement: decompose lightness into illumination and
//! reflectance, weight the histogram by multi-scale reflectance gradients,
//! equalize, add the scaled reflectance back as a detail layer, and
//! reconstruct color. The simpler baselines (plain equalization and
//! gradient-weighted equalization on raw lightness) run through the same
//! entry point so they can be benchmarked side by side.

use std::cell::Cell;
use std::time::{Duration, Instant};

use crate::color::{lightness_of, reconstruct_color, ColorImage};
use crate::equalize::{
    apply_mapping, mapping_from, plain_histogram, weighted_histogram, HistogramModel,
    IntensityMapping, DEFAULT_BINS,
};
use crate::error::{Error, Result};
use crate::field::{LightnessMap, ScalarField};
use crate::retinex::{decompose_with, Decomposition};
use crate::smoothing::{Smoother, SmootherConfig};
use crate::weights::{intensity_weights, reflectance_weights, PyramidConfig, WeightMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Pass the input through untouched (the benchmarking baseline).
    Identity,
    /// Classic histogram equalization of lightness.
    He,
    /// Gradient-weighted equalization on raw lightness.
    Cache,
    /// Gradient-weighted equalization guided by log-reflectance, with the
    /// scaled reflectance added back as detail.
    RgCache,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Identity, Method::He, Method::Cache, Method::RgCache];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Identity => "identity",
            Method::He => "he",
            Method::Cache => "cache",
            Method::RgCache => "rg-cache",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Method::Identity),
            "he" => Ok(Method::He),
            "cache" => Ok(Method::Cache),
            "rg-cache" => Ok(Method::RgCache),
            other => Err(Error::arg(format!(
                "unknown method {other:?} (expected identity, he, cache, or rg-cache)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnhanceConfig {
    pub method: Method,
    /// Reflectance scaling e in `A_out = B + e*R`; ignored by the baselines.
    pub detail: f64,
    /// Histogram bin count K.
    pub bins: usize,
    pub pyramid: PyramidConfig,
    pub smoother: SmootherConfig,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        EnhanceConfig {
            method: Method::RgCache,
            detail: 0.5,
            bins: DEFAULT_BINS,
            pyramid: PyramidConfig::default(),
            smoother: SmootherConfig::default(),
        }
    }
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.detail >= 0.0 && self.detail.is_finite()) {
            return Err(Error::arg("detail scale must be finite and non-negative"));
        }
        if self.bins < 2 {
            return Err(Error::arg("bin count must be at least 2"));
        }
        self.pyramid.validate()?;
        self.smoother.validate()
    }
}

/// Everything the pipeline computed on the way, for inspection and dumps.
/// Which fields are present depends on the method.
#[derive(Debug, Clone, Default)]
pub struct Intermediates {
    pub decomposition: Option<Decomposition>,
    pub weights: Option<WeightMap>,
    pub histogram: Option<HistogramModel>,
    pub mapping: Option<IntensityMapping>,
}

#[derive(Debug, Clone)]
pub struct Enhanced {
    pub image: ColorImage,
    /// Wall-clock time spent inside the smoother (zero for methods that
    /// never smooth).
    pub smoothing: Duration,
    pub intermediates: Option<Intermediates>,
}

/// `A_out = clamp(B + e*R, 0, 1)`: the base layer is in normalized `[0, 1]`
/// units, the reflectance in raw log10 units. Invalid reflectance pixels are
/// stored as 0 and therefore pass the base through unchanged; with `e = 0`
/// the output is bit-identical to the base.
pub fn combine_detail(
    base: &LightnessMap,
    reflectance: &ScalarField,
    detail: f64,
) -> Result<LightnessMap> {
    if base.width() != reflectance.width() || base.height() != reflectance.height() {
        return Err(Error::dims("base and reflectance differ in size"));
    }
    if !(detail >= 0.0 && detail.is_finite()) {
        return Err(Error::arg("detail scale must be finite and non-negative"));
    }
    let values = base
        .values()
        .iter()
        .zip(reflectance.values())
        .map(|(&b, &r)| (b + detail * r).clamp(0.0, 1.0))
        .collect();
    LightnessMap::new(base.width(), base.height(), values)
}

/// Records how long the wrapped smoother ran.
struct TimedSmoother<'a> {
    inner: &'a dyn Smoother,
    elapsed: Cell<Duration>,
}

impl Smoother for TimedSmoother<'_> {
    fn smooth(&self, input: &LightnessMap) -> Result<LightnessMap> {
        let start = Instant::now();
        let result = self.inner.smooth(input);
        self.elapsed.set(start.elapsed());
        result
    }
}

pub fn enhance(image: &ColorImage, config: &EnhanceConfig) -> Result<ColorImage> {
    Ok(enhance_detailed(image, config, false)?.image)
}

/// Like [`enhance`] but reports smoothing time and, when `collect` is set,
/// the intermediate products.
pub fn enhance_detailed(
    image: &ColorImage,
    config: &EnhanceConfig,
    collect: bool,
) -> Result<Enhanced> {
    enhance_with_smoother(image, config, &config.smoother, collect)
}

/// Full pipeline with a caller-supplied illumination smoother (the
/// `rg-cache` method is the only one that uses it).
pub fn enhance_with_smoother(
    image: &ColorImage,
    config: &EnhanceConfig,
    smoother: &dyn Smoother,
    collect: bool,
) -> Result<Enhanced> {
    config.validate()?;

    if config.method == Method::Identity {
        return Ok(Enhanced {
            image: image.clone(),
            smoothing: Duration::ZERO,
            intermediates: collect.then(Intermediates::default),
        });
    }

    let lightness = lightness_of(image);
    let mut smoothing = Duration::ZERO;
    let mut inter = Intermediates::default();

    let (histogram, decomposition) = match config.method {
        Method::Identity => unreachable!("handled above"),
        Method::He => (plain_histogram(&lightness, config.bins)?, None),
        Method::Cache => {
            let weights = intensity_weights(&lightness, &config.pyramid)?;
            let histogram = weighted_histogram(&lightness, &weights, config.bins)?;
            inter.weights = Some(weights);
            (histogram, None)
        }
        Method::RgCache => {
            let timed = TimedSmoother {
                inner: smoother,
                elapsed: Cell::new(Duration::ZERO),
            };
            let decomposition = decompose_with(&lightness, &timed)?;
            smoothing = timed.elapsed.get();
            let weights = reflectance_weights(&decomposition, &config.pyramid)?;
            let histogram = weighted_histogram(&lightness, &weights, config.bins)?;
            inter.weights = Some(weights);
            (histogram, Some(decomposition))
        }
    };

    let mapping = mapping_from(&histogram);
    let base = apply_mapping(&lightness, &mapping);
    let target = match &decomposition {
        Some(d) => combine_detail(&base, d.reflectance(), config.detail)?,
        None => base,
    };
    let output = reconstruct_color(image, &lightness, &target)?;

    let intermediates = collect.then(|| {
        inter.decomposition = decomposition;
        inter.histogram = Some(histogram);
        inter.mapping = Some(mapping);
        inter
    });

    Ok(Enhanced {
        image: output,
        smoothing,
        intermediates,
    })
}
