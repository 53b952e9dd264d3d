//! Deterministic synthetic test cards: a step edge, sinusoidal texture and a
//! smooth gradient, with a different mix per channel.

use std::f64::consts::TAU;

use llf_core::Grid;

use crate::image_io::Image;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CardSpec {
    pub width: usize,
    pub height: usize,
    /// Selects edge angle, texture frequency and colours.
    pub variant: u32,
}

pub fn test_card(spec: CardSpec) -> Image {
    let CardSpec { width, height, variant } = spec;
    let v = variant as f64;
    let angle = 0.35 + 0.4 * v;
    let (nx, ny) = (angle.cos(), angle.sin());
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let period = 5.0 + 2.0 * v;
    let channel = |c: usize| {
        let c = c as f64;
        let low = 0.2 + 0.08 * c;
        let high = 0.75 - 0.1 * ((c + v) % 3.0);
        Grid::from_fn(width, height, |x, y| {
            let (fx, fy) = (x as f64, y as f64);
            let side = (fx - cx) * nx + (fy - cy) * ny;
            let step = if side < 0.0 { low } else { high };
            let texture = 0.06 * (TAU * fx / period + c).sin() * (TAU * fy / (period * 1.3)).cos();
            let gradient = 0.12 * (fx / width as f64 - 0.5) + 0.08 * (fy / height as f64 - 0.5);
            let value = (step + texture + gradient).clamp(0.0, 1.0);
            (value * 255.0 + 0.5).floor() as u8
        })
    };
    Image::from_channels([channel(0), channel(1), channel(2)]).expect("equal channel sizes")
}

/// The shipped corpus used by the sweep and the acceptance checks.
pub fn default_corpus() -> Vec<(String, Image)> {
    [(160, 120, 0), (128, 128, 1), (97, 75, 2)]
        .into_iter()
        .map(|(width, height, variant)| {
            (
                format!("card{variant}_{width}x{height}"),
                test_card(CardSpec { width, height, variant }),
            )
        })
        .collect()
}
