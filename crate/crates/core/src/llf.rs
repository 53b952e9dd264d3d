//! Local Laplacian filtering.
//!
//! Every output coefficient at level `l`, position `(x, y)` is the band-`l`
//! coefficient of a Laplacian pyramid built from a sub-image remapped against
//! `g = G_l[I](x, y)`. The sub-image is centred on `(2^l x, 2^l y)` with
//! half-width `2^(l+2) - 1`, clipped to the image, and its origin is rounded
//! down to a multiple of `2^(l+1)` so that its first `l + 2` pyramid levels
//! sample exactly the same positions as the full image's pyramid.
//!
//! Two arithmetic modes exist. The reference path works in `f64` and remaps
//! with [`remap_pixel`]. The accelerator model works in fixed point: a host stage
//! builds the Gaussian pyramid, nine level processing units (three channels
//! by three bands) produce the output bands with the remap LUT and the
//! shift-add engine, and the host collapses the result.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::convolution::{ColumnPipeline, DEFAULT_SHIFT};
use crate::error::{Error, Result};
use crate::plane::{u8_from_q8, Grid, Plane, PlaneQ};
use crate::pyramid::{collapse, gaussian_pyramid, laplacian_pyramid, Pyramid, PyramidKind};
use crate::remap::{build_lut, remap_pixel, RemapLut, RemapParams};

/// Output bands produced by the accelerator model (plus the residual `G_3`).
pub const ACCEL_BANDS: usize = 3;

/// Half-width of the sub-image for output level `l`.
pub fn half_width(level: usize) -> usize {
    (1 << (level + 2)) - 1
}

/// Inclusive rectangle in level-0 coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }
}

/// Geometry of the sub-image feeding one output coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubImageSpec {
    level: usize,
    x: usize,
    y: usize,
    half_width: usize,
    bounds: Rect,
}

impl SubImageSpec {
    /// Sub-image for pixel `(x, y)` of level `level` in a `width x height` image.
    pub fn new(level: usize, x: usize, y: usize, width: usize, height: usize) -> Result<Self> {
        Self::with_half_width(level, x, y, width, height, half_width(level))
    }

    /// Same as [`SubImageSpec::new`] with an explicit half-width.
    pub fn with_half_width(
        level: usize,
        x: usize,
        y: usize,
        width: usize,
        height: usize,
        half_width: usize,
    ) -> Result<Self> {
        let (lw, lh) = level_dims(width, height, level);
        if x >= lw || y >= lh {
            return Err(Error::Geometry(format!(
                "({x}, {y}) is outside the {lw}x{lh} grid of level {level}"
            )));
        }
        let align = 1usize << (level + 1);
        let span = |c: usize, len: usize| {
            let lo = c.saturating_sub(half_width);
            (lo - lo % align, (c + half_width).min(len - 1))
        };
        let (x0, x1) = span(x << level, width);
        let (y0, y1) = span(y << level, height);
        Ok(Self {
            level,
            x,
            y,
            half_width,
            bounds: Rect { x0, y0, x1, y1 },
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn position(&self) -> (usize, usize) {
        (self.x, self.y)
    }

    /// Level-0 coordinates of the pixel.
    pub fn center(&self) -> (usize, usize) {
        (self.x << self.level, self.y << self.level)
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    /// Position of the pixel on the sub-image's own level-`l` grid.
    ///
    /// The origin is a multiple of `2^(l+1)`, so `(center - origin) / 2^l` is
    /// exact and addresses the same sample as `(x, y)` on the full grid.
    pub fn local_position(&self) -> Result<(usize, usize)> {
        let (cx, cy) = self.center();
        let lx = (cx - self.bounds.x0) >> self.level;
        let ly = (cy - self.bounds.y0) >> self.level;
        let (lw, lh) = level_dims(self.bounds.width(), self.bounds.height(), self.level);
        if lx >= lw || ly >= lh {
            return Err(Error::Geometry(format!(
                "local position ({lx}, {ly}) outside {lw}x{lh} sub-image grid"
            )));
        }
        Ok((lx, ly))
    }
}

/// Dimensions of pyramid level `level` for a `width x height` base.
pub fn level_dims(width: usize, height: usize, level: usize) -> (usize, usize) {
    let mut d = (width, height);
    for _ in 0..level {
        d = (d.0.div_ceil(2), d.1.div_ceil(2));
    }
    d
}

/// Reference coefficient: remap the sub-image against `g` with `remap_pixel`,
/// build its Laplacian pyramid to depth `l + 1` and read band `l`.
pub fn llf_coefficient(image: &Plane, spec: &SubImageSpec, g: f64, params: &RemapParams) -> Result<f64> {
    let b = spec.bounds();
    let sub = image.crop(b.x0, b.y0, b.x1, b.y1).map(|i| remap_pixel(i, g, params));
    read_band(&sub, spec)
}

/// Fixed-point coefficient built with the generic pyramid code on the
/// LUT-remapped sub-image. [`run_lpu`] must agree with it bit for bit.
pub fn llf_coefficient_q(image: &Grid<u8>, spec: &SubImageSpec, g: u8, lut: &RemapLut) -> Result<i32> {
    let b = spec.bounds();
    let sub = image.crop(b.x0, b.y0, b.x1, b.y1).map(|i| lut.apply(i, g));
    read_band(&sub, spec)
}

fn read_band<T: crate::pyramid::PyramidSample>(sub: &Grid<T>, spec: &SubImageSpec) -> Result<T> {
    let pyr = laplacian_pyramid(sub, spec.level() + 1)?;
    let (lx, ly) = spec.local_position()?;
    Ok(pyr.levels()[spec.level()].get(lx, ly))
}

/// Wall-clock split of one filter run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub host_pyramid: Duration,
    pub bands: Duration,
    pub collapse: Duration,
}

impl std::ops::AddAssign for StageTimings {
    fn add_assign(&mut self, rhs: Self) {
        self.host_pyramid += rhs.host_pyramid;
        self.bands += rhs.bands;
        self.collapse += rhs.collapse;
    }
}

/// One band of the reference output pyramid.
pub fn reference_band(image: &Plane, gaussian_level: &Plane, level: usize, params: &RemapParams) -> Result<Plane> {
    let (w, h) = image.dims();
    let (lw, lh) = gaussian_level.dims();
    if (lw, lh) != level_dims(w, h, level) {
        return Err(Error::DimensionMismatch(format!(
            "gaussian level {level} is {lw}x{lh}, expected {:?}",
            level_dims(w, h, level)
        )));
    }
    let mut out = vec![0.0; lw * lh];
    out.par_chunks_mut(lw)
        .enumerate()
        .try_for_each(|(y, row)| -> Result<()> {
            for (x, slot) in row.iter_mut().enumerate() {
                let spec = SubImageSpec::new(level, x, y, w, h)?;
                *slot = llf_coefficient(image, &spec, gaussian_level.get(x, y), params)?;
            }
            Ok(())
        })?;
    Plane::new(lw, lh, out)
}

/// Floating-point local Laplacian filter with `n_bands` edge-aware bands.
pub fn llf_reference(image: &Plane, params: &RemapParams, n_bands: usize) -> Result<Plane> {
    llf_reference_timed(image, params, n_bands).map(|(p, _)| p)
}

pub fn llf_reference_timed(image: &Plane, params: &RemapParams, n_bands: usize) -> Result<(Plane, StageTimings)> {
    let mut t = StageTimings::default();
    let start = Instant::now();
    let gauss = gaussian_pyramid(image, n_bands + 1)?.into_levels();
    t.host_pyramid = start.elapsed();

    let start = Instant::now();
    let mut levels = (0..n_bands)
        .into_par_iter()
        .map(|l| reference_band(image, &gauss[l], l, params))
        .collect::<Result<Vec<_>>>()?;
    levels.push(gauss[n_bands].clone());
    t.bands = start.elapsed();

    let start = Instant::now();
    let out = collapse(&Pyramid::from_levels(PyramidKind::Laplacian, levels)?)?;
    t.collapse = start.elapsed();
    Ok((out, t))
}

/// Which output band an LPU produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LpuConfig {
    level: usize,
}

impl LpuConfig {
    pub fn new(level: usize) -> Result<Self> {
        if level >= ACCEL_BANDS {
            return Err(Error::InvalidParams(format!(
                "LPU level must be below {ACCEL_BANDS}, got {level}"
            )));
        }
        Ok(Self { level })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Filter/downsample passes before the upsample stage.
    pub fn iterations(&self) -> usize {
        self.level + 1
    }
}

/// Reusable buffers of one LPU worker.
#[derive(Default)]
struct LpuScratch {
    current: Vec<i32>,
    next: Vec<i32>,
    column: Vec<i32>,
}

/// Convolution engine followed by the downsampling unit: streams the
/// clamp-padded `w x h` plane column by column and keeps every other output
/// row of every other output column.
fn filter_downsample(src: &[i32], w: usize, h: usize, column: &mut Vec<i32>, dst: &mut Vec<i32>) -> (usize, usize) {
    let (dw, dh) = (w.div_ceil(2), h.div_ceil(2));
    dst.clear();
    dst.resize(dw * dh, 0);
    column.resize(h + 2, 0);
    let mut engine = ColumnPipeline::new(h + 2, DEFAULT_SHIFT);
    for p in 0..w + 2 {
        let c = p.saturating_sub(1).min(w - 1);
        column[0] = src[c];
        for r in 0..h {
            column[r + 1] = src[r * w + c];
        }
        column[h + 1] = src[(h - 1) * w + c];
        engine.push(column);
        if p >= 2 && (p - 2) % 2 == 0 {
            let st = engine.state();
            let ox = (p - 2) / 2;
            for oy in 0..dh {
                let r = 2 * oy;
                dst[oy * dw + ox] = st.x1[r] + st.x2[r] + st.x3[r];
            }
        }
    }
    (dw, dh)
}

/// Upsampling unit plus convolution engine evaluated at one target sample.
///
/// Builds the 3x3 window of the zero-inserted (and `<< 2` scaled) grid around
/// `(tx, ty)` and pushes its three columns through a 3-row engine.
fn upsample_at(src: &[i32], sw: usize, sh: usize, tx: usize, ty: usize) -> i32 {
    let z = |zx: isize, zy: isize| -> i32 {
        if zx.rem_euclid(2) != 0 || zy.rem_euclid(2) != 0 {
            return 0;
        }
        let sx = (zx / 2).clamp(0, sw as isize - 1) as usize;
        let sy = (zy / 2).clamp(0, sh as isize - 1) as usize;
        src[sy * sw + sx] << 2
    };
    let mut engine = ColumnPipeline::new(3, DEFAULT_SHIFT);
    let (tx, ty) = (tx as isize, ty as isize);
    for dx in -1..=1 {
        let col = [z(tx + dx, ty - 1), z(tx + dx, ty), z(tx + dx, ty + 1)];
        engine.push(&col);
    }
    let st = engine.state();
    st.x1[0] + st.x2[0] + st.x3[0]
}

fn lpu_coefficient(
    channel: &Grid<u8>,
    spec: &SubImageSpec,
    g: u8,
    lut: &RemapLut,
    scratch: &mut LpuScratch,
) -> Result<i32> {
    let b = spec.bounds();
    let (lx, ly) = spec.local_position()?;
    // remap unit
    scratch.current.clear();
    for y in b.y0..=b.y1 {
        let row = channel.row(y);
        scratch
            .current
            .extend(row[b.x0..=b.x1].iter().map(|&i| lut.apply(i, g)));
    }
    let (mut w, mut h) = (b.width(), b.height());
    for _ in 0..spec.level() {
        let (nw, nh) = filter_downsample(&scratch.current, w, h, &mut scratch.column, &mut scratch.next);
        std::mem::swap(&mut scratch.current, &mut scratch.next);
        (w, h) = (nw, nh);
    }
    // `current` now holds G_l of the sub-image; one more pass gives G_{l+1}
    let (nw, nh) = filter_downsample(&scratch.current, w, h, &mut scratch.column, &mut scratch.next);
    let up = upsample_at(&scratch.next, nw, nh, lx, ly);
    Ok(scratch.current[ly * w + lx] - up)
}

/// One level processing unit: the full output band `cfg.level()` of one channel.
///
/// `gaussian_level` is the host's fixed-point Gaussian level supplying the anchors.
pub fn run_lpu(channel: &Grid<u8>, gaussian_level: &PlaneQ, cfg: LpuConfig, lut: &RemapLut) -> Result<PlaneQ> {
    let (w, h) = channel.dims();
    let level = cfg.level();
    let (lw, lh) = gaussian_level.dims();
    if (lw, lh) != level_dims(w, h, level) {
        return Err(Error::DimensionMismatch(format!(
            "gaussian level {level} is {lw}x{lh}, expected {:?}",
            level_dims(w, h, level)
        )));
    }
    let mut out = vec![0i32; lw * lh];
    out.par_chunks_mut(lw)
        .enumerate()
        .try_for_each_init(LpuScratch::default, |scratch, (y, row)| -> Result<()> {
            for (x, slot) in row.iter_mut().enumerate() {
                let spec = SubImageSpec::new(level, x, y, w, h)?;
                let g = u8_from_q8(gaussian_level.get(x, y));
                *slot = lpu_coefficient(channel, &spec, g, lut, scratch)?;
            }
            Ok(())
        })?;
    PlaneQ::new(lw, lh, out)
}

/// Host-side fixed-point Gaussian pyramid `G_0..=G_3` of an 8-bit channel.
pub fn host_pyramid(channel: &Grid<u8>) -> Result<Vec<PlaneQ>> {
    let q = PlaneQ::from_u8(channel.width(), channel.height(), channel.samples())?;
    Ok(gaussian_pyramid(&q, ACCEL_BANDS + 1)?.into_levels())
}

/// Host-side collapse of the LPU bands over residual `G_3`.
pub fn host_collapse(bands: Vec<PlaneQ>, residual: PlaneQ) -> Result<PlaneQ> {
    let mut levels = bands;
    levels.push(residual);
    collapse(&Pyramid::from_levels(PyramidKind::Laplacian, levels)?)
}

/// Accelerator model of one channel, returned in fixed point.
pub fn llf_accel_channel(channel: &Grid<u8>, lut: &RemapLut) -> Result<PlaneQ> {
    let gauss = host_pyramid(channel)?;
    let bands = (0..ACCEL_BANDS)
        .into_par_iter()
        .map(|l| run_lpu(channel, &gauss[l], LpuConfig::new(l)?, lut))
        .collect::<Result<Vec<_>>>()?;
    host_collapse(bands, gauss[ACCEL_BANDS].clone())
}

/// Accelerator model over any number of 8-bit channels (three for RGB).
///
/// Output planes are dequantized and unclamped.
pub fn llf_accel_model(channels: &[Grid<u8>], params: &RemapParams) -> Result<Vec<Plane>> {
    llf_accel_model_timed(channels, params).map(|(p, _)| p)
}

pub fn llf_accel_model_timed(channels: &[Grid<u8>], params: &RemapParams) -> Result<(Vec<Plane>, StageTimings)> {
    let lut = build_lut(params);
    let mut t = StageTimings::default();

    let start = Instant::now();
    let gauss = channels
        .par_iter()
        .map(host_pyramid)
        .collect::<Result<Vec<_>>>()?;
    t.host_pyramid = start.elapsed();

    // nine independent units: channel x level
    let start = Instant::now();
    let units: Vec<(usize, usize)> = (0..channels.len())
        .flat_map(|c| (0..ACCEL_BANDS).map(move |l| (c, l)))
        .collect();
    let mut bands = units
        .par_iter()
        .map(|&(c, l)| run_lpu(&channels[c], &gauss[c][l], LpuConfig::new(l)?, &lut))
        .collect::<Result<Vec<_>>>()?;
    t.bands = start.elapsed();

    let start = Instant::now();
    let mut out = Vec::with_capacity(channels.len());
    for (c, g) in gauss.iter().enumerate().rev() {
        let chan_bands = bands.split_off(c * ACCEL_BANDS);
        out.push(host_collapse(chan_bands, g[ACCEL_BANDS].clone())?.dequantize());
    }
    out.reverse();
    t.collapse = start.elapsed();
    Ok((out, t))
}
