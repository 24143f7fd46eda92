//! Batch benchmark: run methods over a directory of images, score every
//! output against its input, and render the results as CSV and as an
//! aligned text table.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use rgcache::metrics::score;
use rgcache::{enhance_detailed, lightness_of, ColorImage, EnhanceConfig, Error, Method, Result};

pub struct BenchOptions {
    /// Worker thread count for the image x method grid.
    pub jobs: usize,
    /// When false, report 0 for both timing columns; the scores are fully
    /// deterministic, so this makes the whole CSV reproducible byte for byte.
    pub include_timing: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            jobs: 1,
            include_timing: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub method: Method,
    /// Image id: the file name within the dataset directory.
    pub image: String,
    pub de: f64,
    pub eme: f64,
    pub pd: f64,
    pub pcqi: f64,
    pub total_ms: f64,
    pub smooth_ms: f64,
}

/// Per-method arithmetic means over all images.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub method: Method,
    pub de: f64,
    pub eme: f64,
    pub pd: f64,
    pub pcqi: f64,
    pub total_ms: f64,
    pub smooth_ms: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    /// One row per (image, method), image-major, images in lexicographic
    /// order, methods in the order they were requested.
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<AggregateRow>,
    /// Unreadable inputs that were skipped, in directory order.
    pub warnings: Vec<String>,
}

fn dataset_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        let path = entry.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .unwrap_or_default();
        if path.is_file() && (ext == "png" || ext == "ppm") {
            files.push(path);
        }
    }
    files.sort_by_key(|p| p.file_name().map(|n| n.to_os_string()));
    Ok(files)
}

/// Run every requested method over every readable image in `dir`.
///
/// `base.method` is ignored; each row runs with its own method substituted
/// into the otherwise-shared config.
pub fn bench_dataset(
    dir: &Path,
    methods: &[Method],
    base: &EnhanceConfig,
    options: &BenchOptions,
) -> Result<BenchReport> {
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no methods requested".into()));
    }
    if options.jobs == 0 {
        return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
    }

    let mut images: Vec<(String, ColorImage)> = Vec::new();
    let mut warnings = Vec::new();
    for path in dataset_files(dir)? {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        match rgcache::io::load_image(&path) {
            Ok(img) => images.push((name, img)),
            Err(err) => warnings.push(format!("skipping {}: {err}", path.display())),
        }
    }
    if images.is_empty() {
        return Err(Error::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "dataset contains no readable .png or .ppm images",
            ),
        });
    }

    let tasks: Vec<(usize, Method)> = (0..images.len())
        .flat_map(|i| methods.iter().map(move |&m| (i, m)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let rows: Vec<BenchRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, method)| {
                let (name, image) = &images[i];
                let config = EnhanceConfig { method, ..*base };
                let start = Instant::now();
                let enhanced = enhance_detailed(image, &config, false)?;
                let total = start.elapsed();
                let scores = score(&lightness_of(image), &lightness_of(&enhanced.image))?;
                let (total_ms, smooth_ms) = if options.include_timing {
                    (
                        total.as_secs_f64() * 1e3,
                        enhanced.smoothing.as_secs_f64() * 1e3,
                    )
                } else {
                    (0.0, 0.0)
                };
                Ok(BenchRow {
                    method,
                    image: name.clone(),
                    de: scores.de,
                    eme: scores.eme,
                    pd: scores.pd,
                    pcqi: scores.pcqi,
                    total_ms,
                    smooth_ms,
                })
            })
            .collect::<Result<_>>()
    })?;

    let aggregates = methods
        .iter()
        .map(|&method| {
            let picked: Vec<&BenchRow> = rows.iter().filter(|r| r.method == method).collect();
            let n = picked.len() as f64;
            let mean = |f: fn(&BenchRow) -> f64| picked.iter().map(|r| f(r)).sum::<f64>() / n;
            AggregateRow {
                method,
                de: mean(|r| r.de),
                eme: mean(|r| r.eme),
                pd: mean(|r| r.pd),
                pcqi: mean(|r| r.pcqi),
                total_ms: mean(|r| r.total_ms),
                smooth_ms: mean(|r| r.smooth_ms),
            }
        })
        .collect();

    Ok(BenchReport {
        rows,
        aggregates,
        warnings,
    })
}

/// Fixed column set; scores to 6 decimals, milliseconds to 3. Aggregate
/// rows carry `(mean)` in the image column.
pub fn to_csv(report: &BenchReport) -> String {
    let mut out = String::from("method,image,de,eme,pd,pcqi,total_ms,smooth_ms\n");
    for r in &report.rows {
        out.push_str(&csv_line(
            r.method, &r.image, r.de, r.eme, r.pd, r.pcqi, r.total_ms, r.smooth_ms,
        ));
    }
    for a in &report.aggregates {
        out.push_str(&csv_line(
            a.method, "(mean)", a.de, a.eme, a.pd, a.pcqi, a.total_ms, a.smooth_ms,
        ));
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn csv_line(
    method: Method,
    image: &str,
    de: f64,
    eme: f64,
    pd: f64,
    pcqi: f64,
    total_ms: f64,
    smooth_ms: f64,
) -> String {
    format!("{method},{image},{de:.6},{eme:.6},{pd:.6},{pcqi:.6},{total_ms:.3},{smooth_ms:.3}\n")
}

pub fn render_table(report: &BenchReport) -> String {
    let header = [
        "method", "image", "de", "eme", "pd", "pcqi", "total_ms", "smooth_ms",
    ];
    let mut cells: Vec<[String; 8]> = Vec::new();
    for r in &report.rows {
        cells.push(table_cells(
            r.method, &r.image, r.de, r.eme, r.pd, r.pcqi, r.total_ms, r.smooth_ms,
        ));
    }
    let split = cells.len();
    for a in &report.aggregates {
        cells.push(table_cells(
            a.method, "(mean)", a.de, a.eme, a.pd, a.pcqi, a.total_ms, a.smooth_ms,
        ));
    }

    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }

    let mut out = String::new();
    let emit = |out: &mut String, row: &[String]| {
        for (i, (cell, w)) in row.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            if i < 2 {
                out.push_str(&format!("{cell:<w$}"));
            } else {
                out.push_str(&format!("{cell:>w$}"));
            }
        }
        out.push('\n');
    };
    let header_row: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    emit(&mut out, &header_row);
    for (i, row) in cells.iter().enumerate() {
        if i == split && split > 0 {
            out.push('\n');
        }
        emit(&mut out, row.as_slice());
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn table_cells(
    method: Method,
    image: &str,
    de: f64,
    eme: f64,
    pd: f64,
    pcqi: f64,
    total_ms: f64,
    smooth_ms: f64,
) -> [String; 8] {
    [
        method.to_string(),
        image.to_string(),
        format!("{de:.3}"),
        format!("{eme:.3}"),
        format!("{pd:.3}"),
        format!("{pcqi:.3}"),
        format!("{total_ms:.1}"),
        format!("{smooth_ms:.1}"),
    ]
}
