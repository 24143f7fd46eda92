//! Command-line front end: `enhance` one image, `decompose` one image, or
//! `bench` a dataset directory into a CSV/table report.
//!
//! Settings resolve as defaults < `--config` key=value file < flags.
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 numerical failure.

pub mod bench;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use rgcache::equalize::write_histogram_csv;
use rgcache::io::{load_image, save_grayscale, save_image};
use rgcache::smoothing::SmootherKind;
use rgcache::weights::PyramidConfig;
use rgcache::{
    decompose, enhance_detailed, lightness_of, render_reflectance_vis, EnhanceConfig, Error,
    Intermediates, LightnessMap, Method, Result, SmootherConfig,
};

use bench::{bench_dataset, render_table, to_csv, BenchOptions};

#[derive(Parser)]
#[command(name = "rgcache", version, about = "Low-light contrast enhancement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance one image and write the result.
    Enhance(EnhanceArgs),
    /// Split one image into illumination and a reflectance visualization.
    Decompose(DecomposeArgs),
    /// Score methods over a dataset directory.
    Bench(BenchArgs),
}

/// Settings shared by all subcommands; every flag is optional so that the
/// config file can fill the gaps before defaults kick in.
#[derive(Args, Clone, Default)]
struct Tuning {
    /// Reflectance detail scale e.
    #[arg(long)]
    detail: Option<f64>,
    /// Pyramid level count L.
    #[arg(long)]
    levels: Option<usize>,
    /// Illumination filter: rtv or gaussian.
    #[arg(long)]
    filter: Option<String>,
    /// Smoothing strength.
    #[arg(long)]
    lambda: Option<f64>,
    /// Gaussian window std-dev.
    #[arg(long)]
    sigma: Option<f64>,
    /// Reweighting rounds.
    #[arg(long)]
    iterations: Option<usize>,
    /// Histogram bin count.
    #[arg(long = "K")]
    bins: Option<usize>,
    /// Flat key=value settings file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EnhanceArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// identity, he, cache, or rg-cache.
    #[arg(long)]
    method: Option<String>,
    /// Also write illumination/reflectance/weights/histogram next to the
    /// output.
    #[arg(long)]
    dump_intermediates: bool,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct DecomposeArgs {
    input: PathBuf,
    /// Directory for the two planes (default: alongside the input).
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of .png/.ppm images.
    #[arg(long)]
    dataset: PathBuf,
    /// Comma-separated method list (default: all).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Write the CSV report here (the table always goes to stdout).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Zero the timing columns so the report is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    tuning: Tuning,
}

pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too; those are not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Enhance(args) => cmd_enhance(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::DimensionMismatch(_) => 1,
        Error::Io { .. } | Error::Decode { .. } | Error::UnsupportedFormat(_) => 2,
        Error::Solver { .. } => 3,
    }
}

/// Accumulated settings; `None` means "not set at this layer".
#[derive(Clone, Default)]
struct Settings {
    method: Option<Method>,
    methods: Option<Vec<Method>>,
    detail: Option<f64>,
    levels: Option<usize>,
    filter: Option<SmootherKind>,
    lambda: Option<f64>,
    sigma: Option<f64>,
    iterations: Option<usize>,
    bins: Option<usize>,
    jobs: Option<usize>,
}

impl Settings {
    fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut settings = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "{}:{}: expected key=value, got {line:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            settings.set(key.trim(), value.trim()).map_err(|e| {
                Error::InvalidArgument(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
        }
        Ok(settings)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value for {key}: {value:?}")))
        }
        match key {
            "method" => self.method = Some(value.parse()?),
            "methods" => {
                let parsed: Result<Vec<Method>> =
                    value.split(',').map(|m| m.trim().parse()).collect();
                self.methods = Some(parsed?);
            }
            "detail" => self.detail = Some(num(key, value)?),
            "levels" => self.levels = Some(num(key, value)?),
            "filter" => self.filter = Some(value.parse()?),
            "lambda" => self.lambda = Some(num(key, value)?),
            "sigma" => self.sigma = Some(num(key, value)?),
            "iterations" => self.iterations = Some(num(key, value)?),
            "K" => self.bins = Some(num(key, value)?),
            "jobs" => self.jobs = Some(num(key, value)?),
            other => {
                return Err(Error::InvalidArgument(format!("unknown key {other:?}")));
            }
        }
        Ok(())
    }

    /// Layer `over` on top of `self`: anything set there wins.
    fn merge(mut self, over: Settings) -> Settings {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if over.$field.is_some() { self.$field = over.$field; })*
            };
        }
        take!(method, methods, detail, levels, filter, lambda, sigma, iterations, bins, jobs);
        self
    }

    fn into_enhance_config(self) -> Result<EnhanceConfig> {
        let defaults = EnhanceConfig::default();
        let config = EnhanceConfig {
            method: self.method.unwrap_or(defaults.method),
            detail: self.detail.unwrap_or(defaults.detail),
            bins: self.bins.unwrap_or(defaults.bins),
            pyramid: PyramidConfig {
                levels: self.levels.unwrap_or(defaults.pyramid.levels),
                ..defaults.pyramid
            },
            smoother: SmootherConfig {
                kind: self.filter.unwrap_or(defaults.smoother.kind),
                lambda: self.lambda.unwrap_or(defaults.smoother.lambda),
                sigma: self.sigma.unwrap_or(defaults.smoother.sigma),
                iterations: self.iterations.unwrap_or(defaults.smoother.iterations),
                ..defaults.smoother
            },
        };
        config.validate()?;
        Ok(config)
    }
}

/// defaults < config file < flags, as one Settings value.
fn resolve(tuning: &Tuning, method: Option<&str>, methods: Option<&[String]>) -> Result<Settings> {
    let from_file = match &tuning.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let mut from_flags = Settings {
        detail: tuning.detail,
        levels: tuning.levels,
        lambda: tuning.lambda,
        sigma: tuning.sigma,
        iterations: tuning.iterations,
        bins: tuning.bins,
        ..Settings::default()
    };
    if let Some(name) = &tuning.filter {
        from_flags.filter = Some(name.parse()?);
    }
    if let Some(name) = method {
        from_flags.method = Some(name.parse()?);
    }
    if let Some(names) = methods {
        let parsed: Result<Vec<Method>> = names.iter().map(|m| m.trim().parse()).collect();
        from_flags.methods = Some(parsed?);
    }
    Ok(from_file.merge(from_flags))
}

fn cmd_enhance(args: EnhanceArgs) -> Result<()> {
    let settings = resolve(&args.tuning, args.method.as_deref(), None)?;
    let config = settings.into_enhance_config()?;
    let image = load_image(&args.input)?;
    let enhanced = enhance_detailed(&image, &config, args.dump_intermediates)?;
    save_image(&enhanced.image, &args.output)?;
    if let Some(inter) = &enhanced.intermediates {
        dump_intermediates(inter, &args.output)?;
    }
    Ok(())
}

/// Sibling files named after the output: `out.png` gets
/// `out_illumination.png`, `out_histogram.csv`, and so on.
fn dump_intermediates(inter: &Intermediates, output: &Path) -> Result<()> {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let dir = output.parent().unwrap_or_else(|| Path::new(""));
    let sibling = |suffix: &str| dir.join(format!("{stem}_{suffix}"));

    if let Some(d) = &inter.decomposition {
        save_grayscale(d.illumination(), sibling("illumination.png"))?;
        save_image(&render_reflectance_vis(d), sibling("reflectance.png"))?;
    }
    if let Some(w) = &inter.weights {
        save_grayscale(&normalized_plane(w.values(), w.width(), w.height()), sibling("weights.png"))?;
    }
    if let (Some(h), Some(m)) = (&inter.histogram, &inter.mapping) {
        let path = sibling("histogram.csv");
        let file = fs::File::create(&path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        write_histogram_csv(h, m, file).map_err(|e| Error::Io { path, source: e })?;
    }
    Ok(())
}

/// Scale an arbitrary positive plane by its maximum so it fits a grayscale
/// dump.
fn normalized_plane(values: &[f64], width: usize, height: usize) -> LightnessMap {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let scaled: Vec<f64> = if max > 0.0 {
        values.iter().map(|v| v / max).collect()
    } else {
        vec![0.0; values.len()]
    };
    LightnessMap::new(width, height, scaled).expect("scaled plane is in range")
}

fn cmd_decompose(args: DecomposeArgs) -> Result<()> {
    let settings = resolve(&args.tuning, None, None)?;
    // Route through the full config so smoother-related keys are validated
    // the same way everywhere.
    let config = settings.into_enhance_config()?;
    let image = load_image(&args.input)?;
    let decomposition = decompose(&lightness_of(&image), &config.smoother)?;

    let stem = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".to_string());
    let dir = match &args.output_dir {
        Some(d) => d.clone(),
        None => args.input.parent().unwrap_or_else(|| Path::new("")).to_path_buf(),
    };
    save_grayscale(
        decomposition.illumination(),
        dir.join(format!("{stem}_illumination.png")),
    )?;
    save_image(
        &render_reflectance_vis(&decomposition),
        dir.join(format!("{stem}_reflectance.png")),
    )?;
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let settings = resolve(&args.tuning, None, args.methods.as_deref())?;
    let methods = settings
        .methods
        .clone()
        .unwrap_or_else(|| Method::ALL.to_vec());
    let jobs = args.jobs.or(settings.jobs).unwrap_or(1);
    let config = settings.into_enhance_config()?;
    let options = BenchOptions {
        jobs,
        include_timing: !args.no_timing,
    };

    let report = bench_dataset(&args.dataset, &methods, &config, &options)?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    print!("{}", render_table(&report));
    if let Some(path) = &args.report {
        fs::write(path, to_csv(&report)).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(())
}
