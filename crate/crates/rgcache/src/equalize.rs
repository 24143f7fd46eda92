//! Histogram models and equalization mappings.
//!
//! The mapping is classical histogram equalization, `T(k) = (K-1) * P(k)`
//! rounded half away from zero — so the increments of the unrounded table
//! are exactly `(K-1) * p(k)`, i.e. each gray level receives output range in
//! proportion to its histogram mass. The only twist is that the histogram
//! may be weighted: mass is an arbitrary positive per-pixel weight instead
//! of a count, which is how gradient information enters the pipeline.
//!
//! Numerical convention: densities and CDFs are cumulated first and divided
//! by the total once, so `P(K-1)` is exactly 1.0 and `T(K-1)` is exactly
//! `K-1`; a weighted histogram with uniform weights is bit-identical to the
//! unweighted one whenever the weight is a power of two (scaling by 2^m is
//! exact in binary floating point).

use std::io;

use crate::error::{Error, Result};
use crate::field::LightnessMap;
use crate::weights::WeightMap;

pub const DEFAULT_BINS: usize = 256;

/// Gray-level index of a `[0, 1]` value: `round((bins-1) * v)`, rounding
/// half away from zero.
#[inline]
pub fn quantize(value: f64, bins: usize) -> usize {
    debug_assert!((0.0..=1.0).contains(&value));
    ((value * (bins - 1) as f64).round() as usize).min(bins - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramModel {
    bins: usize,
    density: Vec<f64>,
    cdf: Vec<f64>,
    pixels: usize,
    counts: Option<Vec<u64>>,
}

impl HistogramModel {
    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Normalized mass per bin; sums to 1 up to rounding.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Cumulative distribution; non-decreasing with `cdf()[bins-1] == 1.0`.
    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels
    }

    /// Raw counts, present only for unweighted histograms.
    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    fn from_masses(masses: Vec<f64>, pixels: usize, counts: Option<Vec<u64>>) -> Self {
        let bins = masses.len();
        let mut cdf = Vec::with_capacity(bins);
        let mut running = 0.0f64;
        for &m in &masses {
            running += m;
            cdf.push(running);
        }
        let total = running;
        debug_assert!(total > 0.0);
        let density = masses.iter().map(|m| m / total).collect();
        for c in &mut cdf {
            *c /= total;
        }
        HistogramModel {
            bins,
            density,
            cdf,
            pixels,
            counts,
        }
    }
}

fn check_bins(bins: usize) -> Result<()> {
    if bins < 2 {
        return Err(Error::arg("histogram needs at least 2 bins"));
    }
    Ok(())
}

/// Ordinary counting histogram of the quantized lightness plane.
pub fn plain_histogram(lightness: &LightnessMap, bins: usize) -> Result<HistogramModel> {
    check_bins(bins)?;
    let mut counts = vec![0u64; bins];
    for &v in lightness.values() {
        counts[quantize(v, bins)] += 1;
    }
    let masses: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    Ok(HistogramModel::from_masses(
        masses,
        lightness.len(),
        Some(counts),
    ))
}

/// Histogram where each pixel contributes its weight instead of a count.
/// Weights are strictly positive by construction of [`WeightMap`], so the
/// total mass is positive and normalization is always defined.
pub fn weighted_histogram(
    lightness: &LightnessMap,
    weights: &WeightMap,
    bins: usize,
) -> Result<HistogramModel> {
    check_bins(bins)?;
    if weights.width() != lightness.width() || weights.height() != lightness.height() {
        return Err(Error::dims("weight map does not match image"));
    }
    let mut masses = vec![0.0f64; bins];
    for (&v, &w) in lightness.values().iter().zip(weights.values()) {
        masses[quantize(v, bins)] += w;
    }
    Ok(HistogramModel::from_masses(masses, lightness.len(), None))
}

/// Gray-level lookup table derived from a histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMapping {
    table: Vec<u32>,
    table_real: Vec<f64>,
}

impl IntensityMapping {
    pub fn bins(&self) -> usize {
        self.table.len()
    }

    /// Rounded table; non-decreasing, last entry is `bins - 1`.
    pub fn table(&self) -> &[u32] {
        &self.table
    }

    /// The table before rounding: `(bins-1) * cdf`.
    pub fn table_real(&self) -> &[f64] {
        &self.table_real
    }
}

pub fn mapping_from(histogram: &HistogramModel) -> IntensityMapping {
    let top = (histogram.bins() - 1) as f64;
    let table_real: Vec<f64> = histogram.cdf().iter().map(|&p| top * p).collect();
    let table = table_real
        .iter()
        .map(|&t| (t.round() as u32).min(top as u32))
        .collect();
    IntensityMapping { table, table_real }
}

/// Quantize, push each level through the table, and return to `[0, 1]`.
pub fn apply_mapping(lightness: &LightnessMap, mapping: &IntensityMapping) -> LightnessMap {
    let bins = mapping.bins();
    let top = (bins - 1) as f64;
    let values = lightness
        .values()
        .iter()
        .map(|&v| mapping.table[quantize(v, bins)] as f64 / top)
        .collect();
    LightnessMap::new(lightness.width(), lightness.height(), values)
        .expect("table entries stay within range")
}

/// Dump `k,p,P,T` rows for plotting.
pub fn write_histogram_csv<W: io::Write>(
    histogram: &HistogramModel,
    mapping: &IntensityMapping,
    mut out: W,
) -> io::Result<()> {
    if histogram.bins() != mapping.bins() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "histogram and mapping disagree on bin count",
        ));
    }
    writeln!(out, "k,p,P,T")?;
    for k in 0..histogram.bins() {
        writeln!(
            out,
            "{},{},{},{}",
            k,
            histogram.density()[k],
            histogram.cdf()[k],
            mapping.table()[k]
        )?;
    }
    Ok(())
}
