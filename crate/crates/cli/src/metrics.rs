//! Mean squared error and PSNR over 8-bit images.

use std::fmt;

use crate::error::{CliError, CliResult};
use crate::image_io::Image;

#[derive(Clone, Debug, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    /// Infinite when the images are identical.
    pub psnr_db: f64,
    pub per_channel_mse: Vec<f64>,
}

impl QualityReport {
    pub fn from_mse(mse: f64, per_channel_mse: Vec<f64>) -> Self {
        Self {
            mse,
            psnr_db: psnr_from_mse(mse),
            per_channel_mse,
        }
    }

    pub fn is_identical(&self) -> bool {
        self.mse == 0.0
    }
}

impl fmt::Display for QualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identical() {
            write!(f, "identical (mse 0)")
        } else {
            write!(f, "{:.2} dB (mse {:.4})", self.psnr_db, self.mse)
        }
    }
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

/// Sum of squared differences per channel.
pub fn squared_error(a: &Image, b: &Image) -> CliResult<[f64; 3]> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(CliError::Validation(format!(
            "image sizes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let mut out = [0.0; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        *slot = a.channels()[c]
            .samples()
            .iter()
            .zip(b.channels()[c].samples())
            .map(|(&x, &y)| {
                let d = x as f64 - y as f64;
                d * d
            })
            .sum();
    }
    Ok(out)
}

pub fn psnr(a: &Image, b: &Image) -> CliResult<QualityReport> {
    let sse = squared_error(a, b)?;
    let n = (a.width() * a.height()) as f64;
    let per_channel: Vec<f64> = sse.iter().map(|s| s / n).collect();
    Ok(QualityReport::from_mse(sse.iter().sum::<f64>() / (3.0 * n), per_channel))
}
