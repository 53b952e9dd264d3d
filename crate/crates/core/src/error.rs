use thiserror::Error;

/// Errors raised by the filtering library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("image of {width}x{height} is too small for {requested} pyramid levels (maximum feasible depth is {max})")]
    DepthTooLarge {
        width: usize,
        height: usize,
        requested: usize,
        max: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// Sub-image coordinate mapping went outside the extracted window.
    #[error("sub-image geometry error: {0}")]
    Geometry(String),

    #[error("total bandwidth of {bandwidth} bits/cycle cannot carry a {pixel_bits}-bit pixel")]
    NoProgress { bandwidth: u32, pixel_bits: u32 },
}

impl Error {
    /// True for errors that signal a broken internal invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Geometry(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
