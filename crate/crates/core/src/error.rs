use std::io;

use thiserror::Error;

/// Errors produced by the crossdiff library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid must be at least 3x3 with positive finite spacing, got {width}x{height}, h = {h}")]
    InvalidGrid { width: usize, height: usize, h: f64 },

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("index ({i}, {j}) is beyond the single ghost layer")]
    IndexOutOfGhostRange { i: isize, j: isize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("diffusion matrix is not positive definite (ellipticity {ellipticity})")]
    NotPositiveDefinite { ellipticity: f64 },

    #[error("cutoff threshold must be positive, got {0}")]
    NonPositiveCutoff(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("reference image has zero variance")]
    DegenerateReference,

    #[error("malformed image: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
