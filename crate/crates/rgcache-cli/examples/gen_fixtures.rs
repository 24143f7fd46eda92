//! Regenerate the bundled fixture images (all synthetic, so they carry no
//! license baggage). Twelve 160x120 low-light scenes plus one 481x321 for
//! the timing checks:
//!
//! ```text
//! cargo run -p rgcache-cli --example gen_fixtures -- fixtures
//! ```
//!
//! Scenes are built so enhancement has something to find: a dim smooth
//! illumination field, fine multi-octave texture riding on it (invisible at
//! native exposure), a few tinted shapes with hard edges, a small bright
//! glow, and an occasional patch of true black. Everything is seeded, so
//! the output is bit-reproducible.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rgcache::io::save_image;
use rgcache::ColorImage;

/// Bilinearly interpolated random grid; `cell` pixels per lattice step.
struct ValueNoise {
    grid: Vec<f64>,
    gw: usize,
    cell: f64,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, width: usize, height: usize, cell: f64) -> Self {
        let gw = (width as f64 / cell).ceil() as usize + 2;
        let gh = (height as f64 / cell).ceil() as usize + 2;
        ValueNoise {
            grid: (0..gw * gh).map(|_| rng.gen_range(0.0..1.0)).collect(),
            gw,
            cell,
        }
    }

    fn at(&self, x: usize, y: usize) -> f64 {
        let fx = x as f64 / self.cell;
        let fy = y as f64 / self.cell;
        let (ix, iy) = (fx as usize, fy as usize);
        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
        let g = |gx: usize, gy: usize| self.grid[gy * self.gw + gx];
        let top = g(ix, iy) * (1.0 - tx) + g(ix + 1, iy) * tx;
        let bot = g(ix, iy + 1) * (1.0 - tx) + g(ix + 1, iy + 1) * tx;
        top * (1.0 - ty) + bot * ty
    }
}

struct Blob {
    cx: f64,
    cy: f64,
    r: f64,
    tint: [f64; 3],
}

const TINTS: [[f64; 3]; 6] = [
    [1.0, 0.62, 0.35], // sodium lamp
    [0.45, 1.0, 0.55], // foliage
    [0.45, 0.62, 1.0], // dusk blue
    [1.0, 0.45, 0.5],  // brick
    [1.0, 0.95, 0.6],  // warm white
    [0.7, 0.5, 1.0],   // violet
];

fn scene(seed: u64, width: usize, height: usize) -> ColorImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);

    // Dim ambient light with a directional falloff.
    let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let (dx, dy) = (angle.cos(), angle.sin());
    let ambient = rng.gen_range(0.05..0.09);
    let ramp = rng.gen_range(0.06..0.12);

    // One small glow kept well under a tenth of the frame.
    let glow_r = rng.gen_range(0.10..0.16) * w.min(h);
    let glow_x = rng.gen_range(0.2..0.8) * w;
    let glow_y = rng.gen_range(0.2..0.8) * h;
    let glow_amp = rng.gen_range(0.35..0.55);

    // Texture octaves; amplitude relative to local light level.
    let coarse = ValueNoise::new(&mut rng, width, height, 23.0);
    let medium = ValueNoise::new(&mut rng, width, height, 9.0);
    let fine = ValueNoise::new(&mut rng, width, height, 3.0);

    let blobs: Vec<Blob> = (0..rng.gen_range(4..7))
        .map(|_| Blob {
            cx: rng.gen_range(0.1..0.9) * w,
            cy: rng.gen_range(0.1..0.9) * h,
            r: rng.gen_range(0.07..0.18) * w.min(h),
            tint: TINTS[rng.gen_range(0..TINTS.len())],
        })
        .collect();
    let base_tint = [
        rng.gen_range(0.75..0.95),
        rng.gen_range(0.8..0.95),
        1.0,
    ];

    // A sliver of true black in a third of the scenes exercises the
    // zero-lightness path end to end.
    let black_patch = if seed % 3 == 0 {
        let bx = rng.gen_range(0..width.saturating_sub(4));
        let by = rng.gen_range(0..height.saturating_sub(3));
        Some((bx, by))
    } else {
        None
    };

    ColorImage::from_fn(width, height, |x, y| {
        if let Some((bx, by)) = black_patch {
            if x >= bx && x < bx + 4 && y >= by && y < by + 3 {
                return [0.0, 0.0, 0.0];
            }
        }
        let (fx, fy) = (x as f64 / w, y as f64 / h);
        let mut light = ambient + ramp * (0.5 + 0.5 * (dx * (fx - 0.5) + dy * (fy - 0.5)) * 2.0);
        let gd = ((x as f64 - glow_x).powi(2) + (y as f64 - glow_y).powi(2)).sqrt();
        light += glow_amp * (-0.5 * (gd / glow_r).powi(2)).exp();

        let texture = 0.5 * coarse.at(x, y) + 0.3 * medium.at(x, y) + 0.2 * fine.at(x, y);
        let lightness = (light * (0.45 + 0.85 * texture)).clamp(0.0, 1.0);

        let mut tint = base_tint;
        for b in &blobs {
            let d = ((x as f64 - b.cx).powi(2) + (y as f64 - b.cy).powi(2)).sqrt();
            if d < b.r {
                tint = b.tint;
                break;
            }
        }
        [lightness * tint[0], lightness * tint[1], lightness * tint[2]]
    })
    .expect("scene dimensions are fixed")
}

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    let out = Path::new(&out);
    std::fs::create_dir_all(out.join("perf")).expect("create fixture directories");

    for i in 0..12u64 {
        let img = scene(1000 + i, 160, 120);
        let path = out.join(format!("lowlight_{:02}.png", i + 1));
        save_image(&img, &path).expect("write fixture");
        println!("wrote {}", path.display());
    }
    let perf = scene(2000, 481, 321);
    let path = out.join("perf").join("desk_481x321.png");
    save_image(&perf, &path).expect("write perf fixture");
    println!("wrote {}", path.display());
}
