//! Local Laplacian filtering with a floating-point reference path, a
//! bit-exact model of a fixed-point streaming accelerator, and a cycle-level
//! model of the accelerator's input streams.

pub mod convolution;
pub mod error;
pub mod hwsim;
pub mod llf;
pub mod plane;
pub mod pyramid;
pub mod remap;

pub use error::{Error, Result};
pub use plane::{Grid, Plane, PlaneQ};
pub use remap::{RemapLut, RemapParams};
