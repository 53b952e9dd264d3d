//! Front end for `llf-core`: image files, quality metrics, synthetic test
//! cards and the command implementations behind the `llf` binary.

pub mod commands;
pub mod corpus;
pub mod error;
pub mod image_io;
pub mod metrics;

pub use error::{CliError, CliResult};
pub use image_io::{load_image, save_image, Image};
