//! Detail/edge remapping around an anchor intensity `g`.
//!
//! A deviation `d = |i - g|` no larger than `sigma` is a detail and is
//! reshaped as `sigma * (d / sigma)^alpha`; anything larger is an edge and
//! becomes `beta * (d - sigma) + sigma`. The sign of `i - g` is reapplied
//! afterwards. `alpha < 1` boosts detail, `alpha > 1` smooths it; `beta < 1`
//! compresses edges (tone mapping), `beta > 1` expands them.
//!
//! [`RemapLut`] precomputes both offset magnitudes for every 8-bit `|i - g|`
//! so the accelerator path needs one lookup and one add per pixel.

use crate::error::{Error, Result};
use crate::plane::{q8_from_u8, quantize_sample};

/// User parameters of the remapping curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemapParams {
    alpha: f64,
    beta: f64,
    sigma: f64,
}

impl RemapParams {
    pub fn new(alpha: f64, beta: f64, sigma: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParams(format!("alpha must be > 0, got {alpha}")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParams(format!("beta must be >= 0, got {beta}")));
        }
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::InvalidParams(format!("sigma must be in (0, 1], got {sigma}")));
        }
        Ok(Self { alpha, beta, sigma })
    }

    /// `alpha = beta = 1`: the remap is the identity.
    pub fn identity(sigma: f64) -> Result<Self> {
        Self::new(1.0, 1.0, sigma)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Offset magnitude for a deviation `d >= 0` on the detail side.
    #[inline]
    pub fn detail_offset(&self, d: f64) -> f64 {
        self.sigma * (d / self.sigma).powf(self.alpha)
    }

    /// Offset magnitude for a deviation `d` on the edge side.
    #[inline]
    pub fn edge_offset(&self, d: f64) -> f64 {
        self.beta * (d - self.sigma) + self.sigma
    }
}

/// Remaps intensity `i` against anchor `g`. The result is not clamped.
#[inline]
pub fn remap_pixel(i: f64, g: f64, params: &RemapParams) -> f64 {
    let diff = i - g;
    if diff == 0.0 {
        return g;
    }
    let d = diff.abs();
    let offset = if d <= params.sigma {
        params.detail_offset(d)
    } else {
        params.edge_offset(d)
    };
    g + offset.copysign(diff)
}

/// 256-entry fixed-point table of offset magnitudes indexed by 8-bit `|i - g|`.
#[derive(Clone, Debug, PartialEq)]
pub struct RemapLut {
    table: [i32; 256],
    sigma_index: usize,
    params: RemapParams,
}

impl RemapLut {
    pub fn table(&self) -> &[i32; 256] {
        &self.table
    }

    /// Largest index treated as detail, `round(sigma * 255)`.
    pub fn sigma_index(&self) -> usize {
        self.sigma_index
    }

    pub fn params(&self) -> &RemapParams {
        &self.params
    }

    /// Remapped fixed-point value of 8-bit intensity `i` against 8-bit anchor `g`.
    #[inline]
    pub fn apply(&self, i: u8, g: u8) -> i32 {
        remap_lut_apply(i, g, self)
    }
}

/// Precomputes the merged detail/edge table for `params`.
pub fn build_lut(params: &RemapParams) -> RemapLut {
    let sigma_index = (params.sigma * 255.0 + 0.5).floor() as usize;
    let mut table = [0i32; 256];
    for (k, slot) in table.iter_mut().enumerate() {
        let d = k as f64 / 255.0;
        let v = if k <= sigma_index {
            params.detail_offset(d)
        } else {
            params.edge_offset(d)
        };
        *slot = quantize_sample(v);
    }
    RemapLut {
        table,
        sigma_index,
        params: *params,
    }
}

#[inline]
pub fn remap_lut_apply(i: u8, g: u8, lut: &RemapLut) -> i32 {
    let anchor = q8_from_u8(g);
    let k = (i as i32 - g as i32).unsigned_abs() as usize;
    match i.cmp(&g) {
        std::cmp::Ordering::Greater => anchor + lut.table[k],
        std::cmp::Ordering::Less => anchor - lut.table[k],
        std::cmp::Ordering::Equal => anchor,
    }
}
