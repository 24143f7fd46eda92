//! Quality metrics, all computed on the 8-bit-quantized lightness plane:
//!
//! * **DE** — discrete entropy of the 256-bin histogram, in bits.
//! * **EME** — mean over non-overlapping 8x8 tiles of `20*log10(max/min)`
//!   with both extremes floored at 1 (so an all-black tile scores 0 rather
//!   than blowing up).
//! * **PD** — expected absolute gray-level difference of two independently
//!   drawn pixels, straight from the histogram.
//! * **PCQI** — patch-based contrast quality of a test image against a
//!   reference: 11x11 patches on a stride-4 grid, each decomposed into mean,
//!   contrast strength, and structure, scored by the product of three
//!   comparators (contrast change, structure similarity, mean shift).
//!
//! DE, EME and PD are no-reference; PCQI compares against the unenhanced
//! input, with 1.0 meaning "unchanged".

use crate::equalize::{plain_histogram, quantize};
use crate::error::{Error, Result};
use crate::field::LightnessMap;

pub const DEFAULT_EME_BLOCK: usize = 8;
pub const PCQI_PATCH: usize = 11;
pub const PCQI_STRIDE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityScores {
    /// Discrete entropy, bits.
    pub de: f64,
    /// Mean tile log-contrast, dB-like.
    pub eme: f64,
    /// Expected pairwise gray-level distance, in gray levels.
    pub pd: f64,
    /// Patch contrast quality vs the reference; 1.0 = unchanged.
    pub pcqi: f64,
}

/// DE, EME and PD of `test` plus PCQI of `test` against `reference`.
pub fn score(reference: &LightnessMap, test: &LightnessMap) -> Result<QualityScores> {
    Ok(QualityScores {
        de: discrete_entropy(test),
        eme: eme(test, DEFAULT_EME_BLOCK)?,
        pd: pix_dist(test),
        pcqi: pcqi(reference, test)?,
    })
}

/// Shannon entropy of the 256-bin histogram; `0 * log 0 := 0`.
pub fn discrete_entropy(lightness: &LightnessMap) -> f64 {
    let h = plain_histogram(lightness, 256).expect("256 >= 2 bins");
    -h.density()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Blockwise enhancement measure. Tiles that do not fill a full block are
/// dropped; gray levels are floored at 1 on the 0..255 scale so flat black
/// tiles contribute 0.
pub fn eme(lightness: &LightnessMap, block: usize) -> Result<f64> {
    if block == 0 {
        return Err(Error::arg("EME block must be at least 1"));
    }
    if lightness.width() < block || lightness.height() < block {
        return Err(Error::dims(format!(
            "image {}x{} smaller than one {block}x{block} EME tile",
            lightness.width(),
            lightness.height()
        )));
    }
    let tiles_x = lightness.width() / block;
    let tiles_y = lightness.height() / block;
    let mut total = 0.0f64;
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let mut lo = u32::MAX;
            let mut hi = 0u32;
            for dy in 0..block {
                for dx in 0..block {
                    let level = quantize(lightness.at(tx * block + dx, ty * block + dy), 256) as u32;
                    lo = lo.min(level);
                    hi = hi.max(level);
                }
            }
            total += 20.0 * (hi.max(1) as f64 / lo.max(1) as f64).log10();
        }
    }
    Ok(total / (tiles_x * tiles_y) as f64)
}

/// `sum_ij p(i) p(j) |i-j|` over the 256-bin histogram (self-pairs included).
pub fn pix_dist(lightness: &LightnessMap) -> f64 {
    let h = plain_histogram(lightness, 256).expect("256 >= 2 bins");
    let p = h.density();
    let mut total = 0.0f64;
    for i in 0..256 {
        if p[i] == 0.0 {
            continue;
        }
        for j in 0..256 {
            total += p[i] * p[j] * (i as f64 - j as f64).abs();
        }
    }
    total
}

struct PairStats {
    mean_a: f64,
    mean_b: f64,
    var_a: f64,
    var_b: f64,
    cov: f64,
}

fn patch_stats(a: &[f64], b: &[f64]) -> PairStats {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    let mut cov = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        var_a += dx * dx;
        var_b += dy * dy;
        cov += dx * dy;
    }
    PairStats {
        mean_a,
        mean_b,
        var_a: var_a / n,
        var_b: var_b / n,
        cov: cov / n,
    }
}

/// Patch contrast quality index of `test` against `reference`, on 0..255
/// values. Per patch, with variances `s1`, `s2` and covariance `s12`:
///
/// ```text
///   qc = atan((s12 + C) / (s1 + C)) / (pi/4)   contrast change
///   qs = (s12 + C) / (sqrt(s1 * s2) + C)       structure similarity
///   qi = exp(-|mu1 - mu2| / L)                 mean-shift penalty
/// ```
///
/// with `C = 3`, `L = 256`. Identical patches score exactly 1 in every
/// factor, so `pcqi(x, x) == 1.0` with no tolerance needed.
pub fn pcqi(reference: &LightnessMap, test: &LightnessMap) -> Result<f64> {
    if reference.width() != test.width() || reference.height() != test.height() {
        return Err(Error::dims("PCQI inputs differ in size"));
    }
    let (w, h) = (reference.width(), reference.height());
    if w < PCQI_PATCH || h < PCQI_PATCH {
        return Err(Error::dims(format!(
            "image {w}x{h} smaller than one {PCQI_PATCH}x{PCQI_PATCH} patch"
        )));
    }

    const C: f64 = 3.0;
    const L: f64 = 256.0;

    let levels = |m: &LightnessMap| -> Vec<f64> {
        m.values().iter().map(|&v| quantize(v, 256) as f64).collect()
    };
    let ra = levels(reference);
    let rb = levels(test);

    let mut patch_a = vec![0.0f64; PCQI_PATCH * PCQI_PATCH];
    let mut patch_b = vec![0.0f64; PCQI_PATCH * PCQI_PATCH];
    let mut total = 0.0f64;
    let mut patches = 0usize;

    let mut y0 = 0;
    while y0 + PCQI_PATCH <= h {
        let mut x0 = 0;
        while x0 + PCQI_PATCH <= w {
            for dy in 0..PCQI_PATCH {
                let row = (y0 + dy) * w + x0;
                let dst = dy * PCQI_PATCH;
                patch_a[dst..dst + PCQI_PATCH].copy_from_slice(&ra[row..row + PCQI_PATCH]);
                patch_b[dst..dst + PCQI_PATCH].copy_from_slice(&rb[row..row + PCQI_PATCH]);
            }
            let s = patch_stats(&patch_a, &patch_b);

            let qc = ((s.cov + C) / (s.var_a + C)).atan() / std::f64::consts::FRAC_PI_4;
            let qs = (s.cov + C) / ((s.var_a * s.var_b).sqrt() + C);
            let qi = (-(s.mean_a - s.mean_b).abs() / L).exp();
            total += qc * qs * qi;
            patches += 1;

            x0 += PCQI_STRIDE;
        }
        y0 += PCQI_STRIDE;
    }

    Ok(total / patches as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize) -> LightnessMap {
        let values = (0..w * h).map(|_| rng.gen_range(0.0..=1.0)).collect();
        LightnessMap::new(w, h, values).unwrap()
    }

    fn uniform_levels_16x16() -> LightnessMap {
        let values: Vec<f64> = (0..256).map(|k| k as f64 / 255.0).collect();
        LightnessMap::new(16, 16, values).unwrap()
    }

    #[test]
    fn entropy_closed_forms() {
        let constant = LightnessMap::filled(5, 5, 0.3).unwrap();
        assert_eq!(discrete_entropy(&constant), 0.0);

        let two = LightnessMap::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert!((discrete_entropy(&two) - 1.0).abs() < 1e-12);

        assert!((discrete_entropy(&uniform_levels_16x16()) - 8.0).abs() <= 1e-9);
    }

    #[test]
    fn entropy_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let a = random_map(&mut rng, 16, 16);
        let reflected = LightnessMap::new(
            16,
            16,
            a.values()
                .iter()
                .map(|&v| (255 - quantize(v, 256)) as f64 / 255.0)
                .collect(),
        )
        .unwrap();
        assert!((discrete_entropy(&a) - discrete_entropy(&reflected)).abs() <= 1e-12);
    }

    #[test]
    fn entropy_never_grows_under_level_merging() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for _ in 0..10 {
            let a = random_map(&mut rng, 16, 16);
            let coarse = LightnessMap::new(
                16,
                16,
                a.values()
                    .iter()
                    .map(|&v| (quantize(v, 256) / 2) as f64 / 255.0)
                    .collect(),
            )
            .unwrap();
            assert!(discrete_entropy(&coarse) <= discrete_entropy(&a) + 1e-12);
        }
    }

    #[test]
    fn eme_closed_forms() {
        for c in [0.0, 0.5, 1.0] {
            let constant = LightnessMap::filled(8, 8, c).unwrap();
            assert_eq!(eme(&constant, 8).unwrap(), 0.0, "constant {c}");
        }

        // One tile spanning levels 1..=255.
        let mut values = vec![1.0 / 255.0; 64];
        values[10] = 1.0;
        let a = LightnessMap::new(8, 8, values).unwrap();
        let expect = 20.0 * 255.0f64.log10();
        assert!((eme(&a, 8).unwrap() - expect).abs() < 1e-9);

        // Same but with a true black: the denominator clamp keeps the score.
        let mut values = vec![1.0 / 255.0; 64];
        values[10] = 1.0;
        values[20] = 0.0;
        let a = LightnessMap::new(8, 8, values).unwrap();
        assert!((eme(&a, 8).unwrap() - expect).abs() < 1e-9);
    }

    #[test]
    fn eme_drops_partial_tiles() {
        // 10x10 with garbage outside the leading 8x8 tile: the remainder
        // strip must not affect the score.
        let base = LightnessMap::from_field(
            crate::field::ScalarField::from_fn(10, 10, |x, y| {
                if x < 8 && y < 8 {
                    0.5
                } else if (x + y) % 2 == 0 {
                    0.0
                } else {
                    1.0
                }
            })
            .unwrap(),
        )
        .unwrap();
        assert_eq!(eme(&base, 8).unwrap(), 0.0);
    }

    #[test]
    fn eme_rejects_undersized_images() {
        let a = LightnessMap::filled(7, 20, 0.5).unwrap();
        assert!(eme(&a, 8).is_err());
        assert!(eme(&a, 0).is_err());
    }

    #[test]
    fn pd_closed_forms() {
        let constant = LightnessMap::filled(4, 4, 0.7).unwrap();
        assert_eq!(pix_dist(&constant), 0.0);

        let half: Vec<f64> = (0..256).map(|i| if i < 128 { 0.0 } else { 1.0 }).collect();
        let a = LightnessMap::new(16, 16, half).unwrap();
        assert_eq!(pix_dist(&a), 127.5); // 2 * 0.5 * 0.5 * 255, all dyadic

        let uniform = uniform_levels_16x16();
        let pd = pix_dist(&uniform);
        assert!((pd - 85.33203125).abs() <= 1e-6); // (256^2 - 1) / (3 * 256)
    }

    #[test]
    fn pd_matches_double_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        for _ in 0..5 {
            let a = random_map(&mut rng, 16, 16);
            let h = plain_histogram(&a, 256).unwrap();
            let p = h.density();
            // Opposite loop nesting, explicitly over j first.
            let mut oracle = 0.0f64;
            for j in 0..256 {
                for i in 0..256 {
                    oracle += p[i] * p[j] * (i as f64 - j as f64).abs();
                }
            }
            assert!((pix_dist(&a) - oracle).abs() <= 1e-12);
        }
    }

    #[test]
    fn pd_is_reflection_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        let a = random_map(&mut rng, 16, 16);
        let reflected = LightnessMap::new(
            16,
            16,
            a.values()
                .iter()
                .map(|&v| (255 - quantize(v, 256)) as f64 / 255.0)
                .collect(),
        )
        .unwrap();
        assert!((pix_dist(&a) - pix_dist(&reflected)).abs() <= 1e-12);
    }

    #[test]
    fn pcqi_of_identical_images_is_exactly_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        for &(w, h) in &[(11, 11), (16, 16), (33, 21)] {
            let a = random_map(&mut rng, w, h);
            assert_eq!(pcqi(&a, &a).unwrap(), 1.0, "{w}x{h}");
        }
    }

    #[test]
    fn pcqi_rewards_contrast_stretch() {
        let mut rng = ChaCha8Rng::seed_from_u64(127);
        let values: Vec<f64> = (0..32 * 32).map(|_| rng.gen_range(0.35..=0.65)).collect();
        let a = LightnessMap::new(32, 32, values).unwrap();
        let stretched = LightnessMap::new(
            32,
            32,
            a.values()
                .iter()
                .map(|&v| (0.5 + 2.0 * (v - 0.5)).clamp(0.0, 1.0))
                .collect(),
        )
        .unwrap();
        let q = pcqi(&a, &stretched).unwrap();
        assert!(q > 1.0, "stretch scored {q}");
    }

    #[test]
    fn pcqi_punishes_contrast_collapse() {
        let mut rng = ChaCha8Rng::seed_from_u64(131);
        let a = random_map(&mut rng, 32, 32);
        let flat = LightnessMap::filled(32, 32, 0.5).unwrap();
        let q = pcqi(&a, &flat).unwrap();
        assert!(q < 1.0, "collapse scored {q}");
    }

    #[test]
    fn pcqi_rejects_bad_shapes() {
        let a = LightnessMap::filled(16, 16, 0.5).unwrap();
        let b = LightnessMap::filled(16, 8, 0.5).unwrap();
        assert!(pcqi(&a, &b).is_err());
        let tiny = LightnessMap::filled(10, 16, 0.5).unwrap();
        assert!(pcqi(&tiny, &tiny).is_err());
    }

    #[test]
    fn score_bundles_all_four() {
        let mut rng = ChaCha8Rng::seed_from_u64(137);
        let a = random_map(&mut rng, 16, 16);
        let s = score(&a, &a).unwrap();
        assert_eq!(s.pcqi, 1.0);
        assert_eq!(s.de, discrete_entropy(&a));
        assert_eq!(s.eme, eme(&a, 8).unwrap());
        assert_eq!(s.pd, pix_dist(&a));
        assert!(s.de <= 8.0 && s.de >= 0.0);
        assert!(s.eme >= 0.0);
        assert!((0.0..=255.0).contains(&s.pd));
    }
}
