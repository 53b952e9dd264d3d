//! Single-channel sample grids.
//!
//! [`Plane`] carries normalized intensities as `f64` for the reference path.
//! [`PlaneQ`] carries signed fixed-point samples for the accelerator model:
//! 8-bit intensity units with [`FRAC_BITS`] fractional bits, so an integer
//! 8-bit code `v` is exactly `v << 8` and normalized 1.0 is [`Q_FULL`].
//! Both are row-major.

use crate::error::{Error, Result};

/// Fractional bits below one 8-bit intensity step.
pub const FRAC_BITS: u32 = 8;

/// One 8-bit intensity step in fixed point.
pub const Q_STEP: i32 = 1 << FRAC_BITS;

/// Fixed-point value of normalized intensity 1.0 (code 255).
pub const Q_FULL: i32 = 255 << FRAC_BITS;

/// Largest magnitude a fixed-point sample may reach (24-bit signed datapath).
pub const Q_LIMIT: i32 = (1 << 23) - 1;

/// Row-major 2-D grid of samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// Reference-path plane of real samples.
pub type Plane = Grid<f64>;

/// Accelerator-path plane of fixed-point samples (see [`Q_FULL`]).
pub type PlaneQ = Grid<i32>;

impl<T: Copy> Grid<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DimensionMismatch(format!(
                "plane must be non-empty, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} plane needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width > 0 && height > 0, "plane must be non-empty");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "plane must be non-empty");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    /// Sample with clamp-to-edge addressing.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    pub fn samples(&self) -> &[T] {
        &self.data
    }

    pub fn samples_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_samples(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    /// Copy of the inclusive rectangle `[x0, x1] x [y0, y1]`.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        debug_assert!(x0 <= x1 && x1 < self.width && y0 <= y1 && y1 < self.height);
        let w = x1 - x0 + 1;
        let h = y1 - y0 + 1;
        let mut data = Vec::with_capacity(w * h);
        for y in y0..=y1 {
            data.extend_from_slice(&self.data[y * self.width + x0..=y * self.width + x1]);
        }
        Self {
            width: w,
            height: h,
            data,
        }
    }

    pub(crate) fn ensure_same_dims<U>(&self, other: &Grid<U>, what: &str) -> Result<()> {
        if self.dims() != (other.width, other.height) {
            return Err(Error::DimensionMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}

impl Plane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs_diff(&self, other: &Plane) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Element-wise `self - other`.
    pub fn sub(&self, other: &Plane) -> Result<Plane> {
        self.ensure_same_dims(other, "plane subtraction")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Element-wise `self + other`.
    pub fn add(&self, other: &Plane) -> Result<Plane> {
        self.ensure_same_dims(other, "plane addition")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    fn zip_with(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        Grid {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Round-to-nearest conversion into fixed point.
    pub fn quantize(&self) -> PlaneQ {
        self.map(quantize_sample)
    }
}

impl PlaneQ {
    pub fn dequantize(&self) -> Plane {
        self.map(dequantize_sample)
    }

    pub fn sub(&self, other: &PlaneQ) -> Result<PlaneQ> {
        self.ensure_same_dims(other, "plane subtraction")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn add(&self, other: &PlaneQ) -> Result<PlaneQ> {
        self.ensure_same_dims(other, "plane addition")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    fn zip_with(&self, other: &PlaneQ, f: impl Fn(i32, i32) -> i32) -> PlaneQ {
        Grid {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Exact fixed-point plane of 8-bit codes.
    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| q8_from_u8(b)).collect())
    }
}

/// Normalized intensity to fixed point, rounded half up.
#[inline]
pub fn quantize_sample(v: f64) -> i32 {
    (v * Q_FULL as f64 + 0.5).floor() as i32
}

#[inline]
pub fn dequantize_sample(q: i32) -> f64 {
    q as f64 / Q_FULL as f64
}

#[inline]
pub fn q8_from_u8(v: u8) -> i32 {
    (v as i32) << FRAC_BITS
}

/// Nearest 8-bit code of a fixed-point sample (half up), clamped to `0..=255`.
#[inline]
pub fn u8_from_q8(q: i32) -> u8 {
    ((q + Q_STEP / 2) >> FRAC_BITS).clamp(0, 255) as u8
}
