//! Separable bicubic resampling (Catmull-Rom, a = -0.5) with pixel-center
//! alignment and edge replication. Used by the weight pyramid in both
//! directions; no antialias prefilter, matching the usual image-pyramid
//! construction.

use crate::field::ScalarField;

fn catmull_rom(s: f64) -> f64 {
    const A: f64 = -0.5;
    let s = s.abs();
    if s < 1.0 {
        ((A + 2.0) * s - (A + 3.0)) * s * s + 1.0
    } else if s < 2.0 {
        ((A * s - 5.0 * A) * s + 8.0 * A) * s - 4.0 * A
    } else {
        0.0
    }
}

/// Four taps (indices clamped to the axis) and their kernel weights for each
/// destination coordinate along one axis.
fn axis_taps(src_len: usize, dst_len: usize) -> Vec<([usize; 4], [f64; 4])> {
    let scale = src_len as f64 / dst_len as f64;
    (0..dst_len)
        .map(|i| {
            // Map the destination pixel center into source coordinates.
            let center = (i as f64 + 0.5) * scale - 0.5;
            let base = center.floor();
            let mut idx = [0usize; 4];
            let mut w = [0.0f64; 4];
            for t in 0..4 {
                let j = base + (t as f64 - 1.0);
                w[t] = catmull_rom(center - j);
                idx[t] = j.clamp(0.0, (src_len - 1) as f64) as usize;
            }
            (idx, w)
        })
        .collect()
}

pub(crate) fn resize_bicubic(src: &ScalarField, dst_w: usize, dst_h: usize) -> ScalarField {
    assert!(dst_w > 0 && dst_h > 0);
    let (sw, sh) = (src.width(), src.height());
    if dst_w == sw && dst_h == sh {
        return src.clone();
    }

    // Horizontal pass.
    let h_taps = axis_taps(sw, dst_w);
    let mut tmp = vec![0.0f64; dst_w * sh];
    let sv = src.values();
    for y in 0..sh {
        let row = &sv[y * sw..(y + 1) * sw];
        let out = &mut tmp[y * dst_w..(y + 1) * dst_w];
        for (x, (idx, w)) in h_taps.iter().enumerate() {
            out[x] = w[0] * row[idx[0]] + w[1] * row[idx[1]] + w[2] * row[idx[2]] + w[3] * row[idx[3]];
        }
    }

    // Vertical pass.
    let v_taps = axis_taps(sh, dst_h);
    let mut values = vec![0.0f64; dst_w * dst_h];
    for (y, (idx, w)) in v_taps.iter().enumerate() {
        let r0 = &tmp[idx[0] * dst_w..idx[0] * dst_w + dst_w];
        let r1 = &tmp[idx[1] * dst_w..idx[1] * dst_w + dst_w];
        let r2 = &tmp[idx[2] * dst_w..idx[2] * dst_w + dst_w];
        let r3 = &tmp[idx[3] * dst_w..idx[3] * dst_w + dst_w];
        let out = &mut values[y * dst_w..(y + 1) * dst_w];
        for x in 0..dst_w {
            out[x] = w[0] * r0[x] + w[1] * r1[x] + w[2] * r2[x] + w[3] * r3[x];
        }
    }

    ScalarField::new(dst_w, dst_h, values).expect("resample produces finite values")
}
