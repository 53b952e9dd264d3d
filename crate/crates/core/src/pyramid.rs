//! Gaussian and Laplacian pyramids.
//!
//! Level `l + 1` keeps the even-indexed samples of the smoothed level `l`, so
//! its dimensions are `ceil(w / 2) x ceil(h / 2)`. Upsampling places sample
//! `(x, y)` at `(2x, 2y)` of the target grid, fills the rest with zeros and
//! smooths with `4 * G`; the one-sample border needed by the 3x3 kernel is
//! taken from the zero-inserted image of the clamp-extended source, so a
//! constant plane upsamples to the same constant everywhere.
//!
//! Everything is generic over [`PyramidSample`]: `f64` runs the exact
//! reference arithmetic, `i32` runs the fixed-point shift-add datapath.

use crate::convolution::{conv3_ref, conv3_ref_valid, conv3_shift_add, conv3_shift_add_valid, Kernel3, DEFAULT_SHIFT};
use crate::error::{Error, Result};
use crate::plane::{Grid, Plane, PlaneQ};

/// Arithmetic used to build and collapse pyramids.
pub trait PyramidSample: Copy + Send + Sync + PartialEq + std::fmt::Debug + 'static {
    const ZERO: Self;

    fn downsample(p: &Grid<Self>) -> Grid<Self>;

    /// Smooths the padded zero-inserted grid down to its interior.
    fn smooth_upsampled(padded: &Grid<Self>) -> Grid<Self>;

    /// Sample value written at retained positions of the zero-inserted grid.
    fn upsample_gain(v: Self) -> Self;

    fn add(a: Self, b: Self) -> Self;

    fn sub(a: Self, b: Self) -> Self;
}

impl PyramidSample for f64 {
    const ZERO: Self = 0.0;

    fn downsample(p: &Plane) -> Plane {
        downsample(p, &Kernel3::default())
    }

    fn smooth_upsampled(padded: &Plane) -> Plane {
        conv3_ref_valid(padded, &Kernel3::default())
    }

    fn upsample_gain(v: f64) -> f64 {
        4.0 * v
    }

    fn add(a: f64, b: f64) -> f64 {
        a + b
    }

    fn sub(a: f64, b: f64) -> f64 {
        a - b
    }
}

impl PyramidSample for i32 {
    const ZERO: Self = 0;

    fn downsample(p: &PlaneQ) -> PlaneQ {
        downsample_q(p)
    }

    fn smooth_upsampled(padded: &PlaneQ) -> PlaneQ {
        conv3_shift_add_valid(padded, DEFAULT_SHIFT)
    }

    fn upsample_gain(v: i32) -> i32 {
        v << 2
    }

    fn add(a: i32, b: i32) -> i32 {
        a + b
    }

    fn sub(a: i32, b: i32) -> i32 {
        a - b
    }
}

/// Keeps samples at even coordinates.
pub fn decimate<T: Copy>(p: &Grid<T>) -> Grid<T> {
    let (w, h) = p.dims();
    Grid::from_fn(w.div_ceil(2), h.div_ceil(2), |x, y| p.get(2 * x, 2 * y))
}

/// Smooth with `kernel`, then keep even-indexed samples.
pub fn downsample(p: &Plane, kernel: &Kernel3) -> Plane {
    decimate(&conv3_ref(p, kernel))
}

/// Fixed-point downsampling through the shift-add engine.
pub fn downsample_q(p: &PlaneQ) -> PlaneQ {
    decimate(&conv3_shift_add(p, DEFAULT_SHIFT))
}

fn check_upsample_target(src: (usize, usize), target: (usize, usize)) -> Result<()> {
    let ok = |s: usize, t: usize| t == 2 * s || t + 1 == 2 * s;
    if ok(src.0, target.0) && ok(src.1, target.1) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "cannot upsample {}x{} to {}x{} (target must be 2n or 2n-1 per axis)",
            src.0, src.1, target.0, target.1
        )))
    }
}

/// Zero-inserted `(tw + 2) x (th + 2)` grid; index 0 is target coordinate -1.
fn zero_insert_padded<T: PyramidSample>(p: &Grid<T>, tw: usize, th: usize) -> Grid<T> {
    Grid::from_fn(tw + 2, th + 2, |px, py| {
        let (tx, ty) = (px as isize - 1, py as isize - 1);
        if tx.rem_euclid(2) == 0 && ty.rem_euclid(2) == 0 {
            T::upsample_gain(p.get_clamped(tx / 2, ty / 2))
        } else {
            T::ZERO
        }
    })
}

/// Generic upsampling to an explicit `target_w x target_h`.
pub fn upsample_generic<T: PyramidSample>(p: &Grid<T>, target_w: usize, target_h: usize) -> Result<Grid<T>> {
    check_upsample_target(p.dims(), (target_w, target_h))?;
    Ok(T::smooth_upsampled(&zero_insert_padded(p, target_w, target_h)))
}

/// Zero-insert onto `target_w x target_h` and smooth with `4 * kernel`.
pub fn upsample(p: &Plane, target_w: usize, target_h: usize, kernel: &Kernel3) -> Result<Plane> {
    check_upsample_target(p.dims(), (target_w, target_h))?;
    Ok(conv3_ref_valid(&zero_insert_padded(p, target_w, target_h), kernel))
}

/// Fixed-point upsampling: retained samples are pre-scaled by `<< 2`.
pub fn upsample_q(p: &PlaneQ, target_w: usize, target_h: usize) -> Result<PlaneQ> {
    upsample_generic(p, target_w, target_h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PyramidKind {
    Gaussian,
    /// Band-pass levels followed by the low-pass residual.
    Laplacian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pyramid<T> {
    kind: PyramidKind,
    levels: Vec<Grid<T>>,
}

impl<T: PyramidSample> Pyramid<T> {
    /// Assembles a pyramid from parts; dimension chain is checked on collapse.
    pub fn from_levels(kind: PyramidKind, levels: Vec<Grid<T>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParams("pyramid needs at least one level".into()));
        }
        Ok(Self { kind, levels })
    }

    pub fn kind(&self) -> PyramidKind {
        self.kind
    }

    pub fn levels(&self) -> &[Grid<T>] {
        &self.levels
    }

    pub fn into_levels(self) -> Vec<Grid<T>> {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Number of band-pass levels (Laplacian) or 0 for a Gaussian pyramid.
    pub fn n_bands(&self) -> usize {
        match self.kind {
            PyramidKind::Gaussian => 0,
            PyramidKind::Laplacian => self.levels.len() - 1,
        }
    }

    pub fn residual(&self) -> &Grid<T> {
        self.levels.last().expect("non-empty pyramid")
    }
}

/// Deepest pyramid (in levels) supported by a `w x h` image.
pub fn max_levels(width: usize, height: usize) -> usize {
    let m = width.min(height);
    if m == 0 {
        0
    } else {
        (usize::BITS - m.leading_zeros()) as usize
    }
}

fn check_depth(width: usize, height: usize, n_levels: usize) -> Result<()> {
    if n_levels == 0 {
        return Err(Error::InvalidParams("pyramid depth must be at least 1".into()));
    }
    let max = max_levels(width, height);
    if n_levels > max {
        return Err(Error::DepthTooLarge {
            width,
            height,
            requested: n_levels,
            max,
        });
    }
    Ok(())
}

/// `[G_0, .., G_{n_levels-1}]` with `G_0 = p`.
pub fn gaussian_pyramid<T: PyramidSample>(p: &Grid<T>, n_levels: usize) -> Result<Pyramid<T>> {
    check_depth(p.width(), p.height(), n_levels)?;
    let mut levels = Vec::with_capacity(n_levels);
    levels.push(p.clone());
    for l in 1..n_levels {
        let next = T::downsample(&levels[l - 1]);
        levels.push(next);
    }
    Ok(Pyramid {
        kind: PyramidKind::Gaussian,
        levels,
    })
}

/// `n_bands` band-pass levels `G_l - up(G_{l+1})` plus the residual `G_{n_bands}`.
pub fn laplacian_pyramid<T: PyramidSample>(p: &Grid<T>, n_bands: usize) -> Result<Pyramid<T>> {
    let gauss = gaussian_pyramid(p, n_bands + 1)?.into_levels();
    let mut levels = Vec::with_capacity(n_bands + 1);
    for l in 0..n_bands {
        let (w, h) = gauss[l].dims();
        let up = upsample_generic(&gauss[l + 1], w, h)?;
        levels.push(band_difference(&gauss[l], &up));
    }
    levels.push(gauss[n_bands].clone());
    Ok(Pyramid {
        kind: PyramidKind::Laplacian,
        levels,
    })
}

fn band_difference<T: PyramidSample>(a: &Grid<T>, b: &Grid<T>) -> Grid<T> {
    let (w, h) = a.dims();
    let data = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| T::sub(x, y))
        .collect();
    Grid::new(w, h, data).expect("same dims")
}

/// Rebuilds `G_0` by iterating `G_l = L_l + up(G_{l+1})` from the residual.
pub fn collapse<T: PyramidSample>(pyr: &Pyramid<T>) -> Result<Grid<T>> {
    if pyr.kind != PyramidKind::Laplacian {
        return Err(Error::InvalidParams("only a Laplacian pyramid can be collapsed".into()));
    }
    for pair in pyr.levels.windows(2) {
        let (w, h) = pair[0].dims();
        if pair[1].dims() != (w.div_ceil(2), h.div_ceil(2)) {
            return Err(Error::DimensionMismatch(format!(
                "level of {}x{} cannot sit above {}x{}",
                pair[1].width(),
                pair[1].height(),
                w,
                h
            )));
        }
    }
    let mut current = pyr.residual().clone();
    for band in pyr.levels[..pyr.levels.len() - 1].iter().rev() {
        let up = upsample_generic(&current, band.width(), band.height())?;
        let data = band
            .samples()
            .iter()
            .zip(up.samples())
            .map(|(&b, &u)| T::add(b, u))
            .collect();
        current = Grid::new(band.width(), band.height(), data)?;
    }
    Ok(current)
}
