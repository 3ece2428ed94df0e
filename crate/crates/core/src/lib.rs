//! Nonlinear cross-diffusion filtering of two-channel images.
//!
//! An image `u₀` is paired with a second channel `v₀ = 0` and evolved by
//! the coupled system `∂ₜ(u, v) = ∇·(g(|w|) d ∇(u, v))`, where `d` is a
//! constant 2×2 matrix with positive definite symmetric part and `g` an
//! edge-stopping function of the edge variable `w`. The first channel is the
//! filtered image; the second acts as an edge detector.

pub mod cli;
pub mod diffusion;
pub mod error;
pub mod experiment;
pub mod field;
pub mod metrics;
pub mod pgm;
pub mod regularize;
pub mod scalespace;
pub mod solver;
pub mod synth;

pub use diffusion::{
    edge_stopping, eigen_discriminant, ellipticity, preset, preset_by_name, DiffusionMatrix,
    EdgeStopping, Preset, PresetName,
};
pub use error::{Error, Result};
pub use field::{new_pair, BoundaryMode, ChannelPair, ImageGrid, ScalarField};
pub use metrics::{add_gaussian_noise, npb, psnr, snr, variance, MetricsReport, NoiseSpec};
pub use regularize::{cutoff, edge_variable, ksigma_convolve, EdgeVariableStrategy};
pub use solver::{
    max_stable_dt, run, step, MonitorSample, Scheme, SolverConfig, Trajectory,
};
pub use scalespace::{asymptotic_decay, check_invariance, InvarianceCheck, InvarianceKind, InvarianceReport};
