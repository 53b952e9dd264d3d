#![allow(dead_code)]

use llf_core::plane::{quantize_sample, Grid, Plane, PlaneQ};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plane(rng: &mut impl Rng, w: usize, h: usize) -> Plane {
    Plane::from_fn(w, h, |_, _| rng.gen::<f64>())
}

pub fn random_u8(rng: &mut impl Rng, w: usize, h: usize) -> Grid<u8> {
    Grid::from_fn(w, h, |_, _| rng.gen::<u8>())
}

pub fn random_q(rng: &mut impl Rng, w: usize, h: usize) -> PlaneQ {
    Grid::from_fn(w, h, |_, _| quantize_sample(rng.gen_range(-1.0..2.0)))
}

pub fn to_unit(p: &Grid<u8>) -> Plane {
    p.map(|v| v as f64 / 255.0)
}
