//! Implementations of the `llf` subcommands, independent of argument parsing.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use llf_core::hwsim::{self, Bandwidth, ReplicationPlan};
use llf_core::llf::{self, StageTimings, ACCEL_BANDS};
use llf_core::{Plane, RemapParams};
use rayon::prelude::*;

use crate::corpus::{test_card, CardSpec};
use crate::error::{CliError, CliResult};
use crate::image_io::{load_image, save_image, Image};
use crate::metrics::{psnr_from_mse, squared_error};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterPath {
    Reference,
    Accel,
}

impl std::str::FromStr for FilterPath {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "reference" => Ok(FilterPath::Reference),
            "accel" => Ok(FilterPath::Accel),
            _ => Err(CliError::Validation(format!("unknown path '{s}' (reference|accel)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Count(usize),
}

impl std::str::FromStr for Threads {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Threads::Count(n)),
            _ => Err(CliError::Validation(format!("bad thread count '{s}' (positive integer or 'auto')"))),
        }
    }
}

/// Runs `f` on a pool of the requested size.
pub fn with_threads<T: Send>(threads: Threads, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Threads::Count(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub params: RemapParams,
    pub path: FilterPath,
    pub n_bands: usize,
    pub threads: Threads,
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.input.as_os_str().is_empty() || self.output.as_os_str().is_empty() {
            return Err(CliError::Validation("input and output paths must be non-empty".into()));
        }
        if self.n_bands == 0 {
            return Err(CliError::Validation("--bands must be at least 1".into()));
        }
        if self.path == FilterPath::Accel && self.n_bands != ACCEL_BANDS {
            return Err(CliError::Validation(format!(
                "the accel path always produces {ACCEL_BANDS} bands"
            )));
        }
        Ok(())
    }
}

/// Filters all three channels.
pub fn filter_image(image: &Image, params: &RemapParams, path: FilterPath, n_bands: usize) -> CliResult<(Vec<Plane>, StageTimings)> {
    match path {
        FilterPath::Accel => {
            if n_bands != ACCEL_BANDS {
                return Err(CliError::Validation(format!(
                    "the accel path always produces {ACCEL_BANDS} bands"
                )));
            }
            Ok(llf::llf_accel_model_timed(image.channels(), params)?)
        }
        FilterPath::Reference => {
            let mut timings = StageTimings::default();
            let mut out = Vec::with_capacity(3);
            for p in image.planes() {
                let (o, t) = llf::llf_reference_timed(&p, params, n_bands)?;
                timings += t;
                out.push(o);
            }
            Ok((out, timings))
        }
    }
}

pub fn cmd_run(cfg: &RunConfig, out: &mut impl Write) -> CliResult<StageTimings> {
    cfg.validate()?;
    let image = load_image(&cfg.input)?;
    let (planes, t) = with_threads(cfg.threads, || filter_image(&image, &cfg.params, cfg.path, cfg.n_bands))??;
    save_image(&planes, &cfg.output)?;
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    let _ = writeln!(
        out,
        "host pyramid: {:.1} ms\nbands: {:.1} ms\ncollapse: {:.1} ms",
        ms(t.host_pyramid),
        ms(t.bands),
        ms(t.collapse)
    );
    Ok(t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub params: RemapParams,
    pub psnr_db: f64,
}

/// The 18 parameter cells: alpha x sigma at beta = 1, then beta x sigma at alpha = 1.
pub fn default_grid() -> Vec<RemapParams> {
    let sigmas = [0.1, 0.2, 0.4];
    let mut cells = Vec::with_capacity(18);
    for alpha in [0.25, 0.5, 2.0] {
        for s in sigmas {
            cells.push(RemapParams::new(alpha, 1.0, s).expect("valid cell"));
        }
    }
    for beta in [0.0, 0.5, 1.0] {
        for s in sigmas {
            cells.push(RemapParams::new(1.0, beta, s).expect("valid cell"));
        }
    }
    cells
}

/// Cartesian product of explicit lists.
pub fn grid_from_lists(alphas: &[f64], betas: &[f64], sigmas: &[f64]) -> CliResult<Vec<RemapParams>> {
    let mut cells = Vec::new();
    for &a in alphas {
        for &b in betas {
            for &s in sigmas {
                cells.push(RemapParams::new(a, b, s)?);
            }
        }
    }
    if cells.is_empty() {
        return Err(CliError::Validation("sweep grid is empty".into()));
    }
    Ok(cells)
}

/// Accelerator-vs-reference PSNR per cell, pooling the squared error over all images.
pub fn cmd_sweep(images: &[Image], grid: &[RemapParams]) -> CliResult<Vec<SweepRow>> {
    if images.is_empty() || grid.is_empty() {
        return Err(CliError::Validation("sweep needs at least one image and one cell".into()));
    }
    grid.iter()
        .map(|params| {
            let mut sse = 0.0;
            let mut n = 0.0;
            for img in images {
                let (acc, _) = filter_image(img, params, FilterPath::Accel, ACCEL_BANDS)?;
                let (reference, _) = filter_image(img, params, FilterPath::Reference, ACCEL_BANDS)?;
                let e = squared_error(&Image::from_planes(&acc)?, &Image::from_planes(&reference)?)?;
                sse += e.iter().sum::<f64>();
                n += (img.width() * img.height() * 3) as f64;
            }
            Ok(SweepRow {
                params: *params,
                psnr_db: psnr_from_mse(sse / n),
            })
        })
        .collect()
}

pub fn emit_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("alpha,beta,sigma,psnr_db\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.2}",
            r.params.alpha(),
            r.params.beta(),
            r.params.sigma(),
            r.psnr_db
        );
    }
    out
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("bad {what} '{}'", t.trim())))
        })
        .collect()
}

pub const DEFAULT_BANDWIDTHS: &str = "32,64,128,256,inf";

#[derive(Clone, Debug)]
pub enum SimMode {
    Bandwidth(Vec<Bandwidth>),
    Replication { max_instances: usize },
}

/// Simulator CSV for an image of `width x height`.
pub fn cmd_sim(mode: &SimMode, width: usize, height: usize) -> CliResult<String> {
    match mode {
        SimMode::Bandwidth(list) => {
            if list.is_empty() {
                return Err(CliError::Validation("empty bandwidth list".into()));
            }
            Ok(hwsim::emit_sim_csv(&hwsim::bandwidth_sweep(width, height, list)?))
        }
        SimMode::Replication { max_instances } => {
            ReplicationPlan::new(*max_instances)?;
            let reports = (1..=*max_instances)
                .map(|n| ReplicationPlan::new(n).map(|p| hwsim::simulate_replication(width, height, &p)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(hwsim::emit_replication_csv(&reports))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub megapixels: f64,
    pub side: usize,
    /// Per-band time over all three channels, bands in order L1, L2, L3.
    pub bands: [Duration; ACCEL_BANDS],
    /// Wall time of the nine units launched together.
    pub parallel: Duration,
    pub host: Duration,
}

impl BenchRow {
    pub fn sequential(&self) -> Duration {
        self.bands.iter().sum()
    }
}

pub fn side_for_megapixels(mp: f64) -> usize {
    (mp * (1u64 << 20) as f64).sqrt().round() as usize
}

/// Inputs for timing the accelerator model on a square synthetic card.
pub struct BenchSetup {
    megapixels: f64,
    side: usize,
    image: Image,
    gauss: Vec<Vec<llf_core::PlaneQ>>,
    lut: llf_core::RemapLut,
    host: Duration,
}

impl BenchSetup {
    pub fn new(mp: f64, params: &RemapParams) -> CliResult<Self> {
        if mp.is_nan() || mp <= 0.0 {
            return Err(CliError::Validation(format!("bad size {mp} MP")));
        }
        let side = side_for_megapixels(mp);
        let image = test_card(CardSpec { width: side, height: side, variant: 0 });
        let start = Instant::now();
        let gauss = image
            .channels()
            .iter()
            .map(llf::host_pyramid)
            .collect::<Result<Vec<_>, _>>()?;
        let host = start.elapsed();
        Ok(Self {
            megapixels: mp,
            side,
            image,
            gauss,
            lut: llf_core::remap::build_lut(params),
            host,
        })
    }

    /// Runs the level-`l` unit of every channel, one after another.
    pub fn time_band(&self, level: usize) -> CliResult<Duration> {
        let cfg = llf::LpuConfig::new(level)?;
        let start = Instant::now();
        for (c, chan) in self.image.channels().iter().enumerate() {
            llf::run_lpu(chan, &self.gauss[c][level], cfg, &self.lut)?;
        }
        Ok(start.elapsed())
    }

    /// Runs all nine units together on the current pool.
    pub fn time_parallel(&self) -> CliResult<Duration> {
        let units: Vec<(usize, usize)> = (0..3).flat_map(|c| (0..ACCEL_BANDS).map(move |l| (c, l))).collect();
        let start = Instant::now();
        units.par_iter().try_for_each(|&(c, l)| -> llf_core::Result<()> {
            llf::run_lpu(&self.image.channels()[c], &self.gauss[c][l], llf::LpuConfig::new(l)?, &self.lut).map(|_| ())
        })?;
        Ok(start.elapsed())
    }

    pub fn run(&self) -> CliResult<BenchRow> {
        let mut bands = [Duration::ZERO; ACCEL_BANDS];
        for (l, slot) in bands.iter_mut().enumerate() {
            *slot = self.time_band(l)?;
        }
        Ok(BenchRow {
            megapixels: self.megapixels,
            side: self.side,
            bands,
            parallel: self.time_parallel()?,
            host: self.host,
        })
    }
}

/// Times the accelerator model on a square synthetic card.
pub fn bench_size(mp: f64, params: &RemapParams) -> CliResult<BenchRow> {
    BenchSetup::new(mp, params)?.run()
}

pub fn cmd_bench(sizes: &[f64], params: &RemapParams) -> CliResult<Vec<BenchRow>> {
    sizes.iter().map(|&mp| bench_size(mp, params)).collect()
}

pub fn format_bench_table(rows: &[BenchRow]) -> String {
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    let mut out = String::from("software model timings (ms), accelerator path, 3 channels\n");
    let _ = writeln!(
        out,
        "{:>6} {:>11} {:>10} {:>10} {:>10} {:>11} {:>10}",
        "MP", "size", "L1", "L2", "L3", "sequential", "parallel"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>6.2} {:>11} {:>10.1} {:>10.1} {:>10.1} {:>11.1} {:>10.1}",
            r.megapixels,
            format!("{0}x{0}", r.side),
            ms(r.bands[0]),
            ms(r.bands[1]),
            ms(r.bands[2]),
            ms(r.sequential()),
            ms(r.parallel)
        );
    }
    out
}
