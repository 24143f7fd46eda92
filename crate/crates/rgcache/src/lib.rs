//! Reflectance-guided contrast-accumulated histogram equalization.
//!
//! A contrast enhancement toolkit for low-light photographs built around one
//! idea: histogram equalization spends output range on whatever the
//! histogram says is frequent, so *weight the histogram by where the detail
//! actually lives* and equalization will spend range there instead.
//!
//! The full pipeline (`Method::RgCache`):
//!
//! 1. Lightness `A = max(R, G, B)` per pixel, in `[0, 1]`.
//! 2. Illumination `I` by edge-preserving (relative-total-variation)
//!    smoothing of `A`; reflectance `R = log10(A / I)`, signed, carrying the
//!    fine detail.
//! 3. Per-pixel weights: 4-neighbour gradient magnitude of `R`, computed on
//!    a bicubic pyramid and merged across scales by geometric mean.
//! 4. Weighted histogram of quantized `A`, equalization mapping
//!    `T(k) = (K-1) * P(k)`, base layer `B = T(A)`.
//! 5. `A_out = clamp(B + e * R, 0, 1)`, then color reconstruction
//!    `C_out = C_in * A_out / A_in`, which preserves hue and saturation.
//!
//! `Method::He` (plain equalization) and `Method::Cache` (gradient weights
//! straight from lightness, no decomposition) are included as baselines, and
//! [`metrics`] implements the four quality scores used to compare them.
//!
//! Images are `f64` in `[0, 1]` end to end; files are read from 8/16-bit
//! PNG or binary PPM and written as 8-bit.

pub mod color;
pub mod equalize;
pub mod error;
pub mod field;
pub mod io;
pub mod metrics;
pub mod pipeline;
mod resample;
pub mod retinex;
pub mod smoothing;
pub mod sparse;
pub mod weights;

pub use color::{lightness_of, reconstruct_color, ColorImage};
pub use error::{Error, Result};
pub use field::{LightnessMap, ScalarField};
pub use metrics::QualityScores;
pub use pipeline::{
    combine_detail, enhance, enhance_detailed, enhance_with_smoother, EnhanceConfig, Enhanced,
    Intermediates, Method,
};
pub use retinex::{decompose, decompose_with, render_reflectance_vis, Decomposition};
pub use smoothing::{smooth, Smoother, SmootherConfig, SmootherKind};
pub use weights::{PyramidConfig, WeightMap};
