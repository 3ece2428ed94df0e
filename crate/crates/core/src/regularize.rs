//! Edge variables fed to the edge-stopping function.
//!
//! Three choices: the raw second channel, its pointwise cutoff `min(v, M)`,
//! and `|w_σ|`, the magnitude of the second component of the matrix
//! convolution `K_σ * (u, v)` whose Fourier symbol is `exp(−|ξ|² σ d)`.
//! The convolution acts on the periodic extension of the grid.

use std::f64::consts::TAU;
use std::str::FromStr;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::diffusion::{ellipticity, DiffusionMatrix};
use crate::error::{Error, Result};
use crate::field::{ChannelPair, ImageGrid, ScalarField};

/// Which quantity enters `g`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EdgeVariableStrategy {
    /// `w = v`.
    #[default]
    Raw,
    /// `w = min(v, M)`, recomputed from the current state at every step.
    Cutoff { threshold: f64 },
    /// `w = |(K_σ * (u, v))₂|`. With `base == None` the solver's own matrix is used.
    Smoothed {
        sigma: f64,
        base: Option<DiffusionMatrix>,
    },
}

impl EdgeVariableStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EdgeVariableStrategy::Raw => Ok(()),
            EdgeVariableStrategy::Cutoff { threshold } => {
                if threshold > 0.0 {
                    Ok(())
                } else {
                    Err(Error::NonPositiveCutoff(threshold))
                }
            }
            EdgeVariableStrategy::Smoothed { sigma, base } => {
                if !(sigma >= 0.0) || !sigma.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "sigma must be non-negative, got {sigma}"
                    )));
                }
                if let Some(d) = base {
                    d.validated()?;
                }
                Ok(())
            }
        }
    }

    /// Fills in the smoothing base matrix when it was left to the solver.
    pub fn with_default_base(self, d: DiffusionMatrix) -> Self {
        match self {
            EdgeVariableStrategy::Smoothed { sigma, base: None } => EdgeVariableStrategy::Smoothed {
                sigma,
                base: Some(d),
            },
            other => other,
        }
    }
}

impl FromStr for EdgeVariableStrategy {
    type Err = Error;

    /// `raw`, `cutoff:<M>` or `smoothed:<sigma>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let bad = || Error::InvalidParameter(format!("unrecognised strategy `{s}`"));
        let strategy = if lower == "raw" {
            EdgeVariableStrategy::Raw
        } else if let Some(m) = lower.strip_prefix("cutoff:") {
            EdgeVariableStrategy::Cutoff {
                threshold: m.trim().parse().map_err(|_| bad())?,
            }
        } else if let Some(sigma) = lower.strip_prefix("smoothed:") {
            EdgeVariableStrategy::Smoothed {
                sigma: sigma.trim().parse().map_err(|_| bad())?,
                base: None,
            }
        } else {
            return Err(bad());
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

/// Pointwise `min(field, M)`. Only clips from above.
pub fn cutoff(field: &ScalarField, threshold: f64) -> Result<ScalarField> {
    if !(threshold > 0.0) {
        return Err(Error::NonPositiveCutoff(threshold));
    }
    Ok(field.map(|x| x.min(threshold)))
}

/// `exp(−t d)` for a 2×2 matrix, as `[[a, b], [c, e]]` in row-major order.
///
/// Writes `−t d = m I + B` with `B` traceless, so `B² = q² I` where
/// `q² = −det B`, and sums the series into hyperbolic (or trigonometric,
/// for `q² < 0`) functions of `q`.
pub fn expm_scaled(d: &DiffusionMatrix, t: f64) -> [f64; 4] {
    let (a11, a12, a21, a22) = (-t * d.d11, -t * d.d12, -t * d.d21, -t * d.d22);
    let m = 0.5 * (a11 + a22);
    let (b11, b22) = (a11 - m, a22 - m);
    let q2 = b11 * b11 + a12 * a21;
    // c0 = e^m cosh q, c1 = e^m sinh(q)/q
    let (c0, c1) = if q2.abs() < 1e-8 {
        let em = m.exp();
        (
            em * (1.0 + q2 / 2.0 + q2 * q2 / 24.0),
            em * (1.0 + q2 / 6.0 + q2 * q2 / 120.0),
        )
    } else if q2 > 0.0 {
        let q = q2.sqrt();
        let (ep, em) = ((m + q).exp(), (m - q).exp());
        (0.5 * (ep + em), 0.5 * (ep - em) / q)
    } else {
        let q = (-q2).sqrt();
        let em = m.exp();
        (em * q.cos(), em * q.sin() / q)
    };
    [c0 + c1 * b11, c1 * a12, c1 * a21, c0 + c1 * b22]
}

/// Signed angular frequency of DFT bin `k` on `n` samples spaced `h`.
fn angular_frequency(k: usize, n: usize, h: f64) -> f64 {
    let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    TAU * signed / (n as f64 * h)
}

/// Squared angular frequency `|ξ|²` for every bin of `grid`, row-major.
pub fn frequency_magnitudes(grid: &ImageGrid) -> Vec<f64> {
    let (w, hgt, h) = (grid.width(), grid.height(), grid.h());
    let mut out = Vec::with_capacity(grid.len());
    for ky in 0..hgt {
        let fy = angular_frequency(ky, hgt, h);
        for kx in 0..w {
            let fx = angular_frequency(kx, w, h);
            out.push(fx * fx + fy * fy);
        }
    }
    out
}

/// In-place 2D DFT of row-major data.
pub(crate) fn fft2(data: &mut [Complex64], width: usize, height: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
    } else {
        (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
    };
    row_fft.process(data);
    let mut column = vec![Complex64::default(); height];
    for i in 0..width {
        for (j, c) in column.iter_mut().enumerate() {
            *c = data[j * width + i];
        }
        col_fft.process(&mut column);
        for (j, c) in column.iter().enumerate() {
            data[j * width + i] = *c;
        }
    }
}

fn to_complex(field: &ScalarField) -> Vec<Complex64> {
    field.values().iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Applies the matrix kernel `K_σ` with symbol `exp(−|ξ|² σ d)`.
pub fn ksigma_convolve(pair: &ChannelPair, d: &DiffusionMatrix, sigma: f64) -> Result<ChannelPair> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be non-negative, got {sigma}"
        )));
    }
    let alpha = ellipticity(d);
    if !(alpha > 0.0) {
        return Err(Error::NotPositiveDefinite { ellipticity: alpha });
    }
    if sigma == 0.0 {
        return Ok(pair.clone());
    }
    let grid = *pair.grid();
    let (w, hgt) = (grid.width(), grid.height());
    let mut uh = to_complex(pair.u());
    let mut vh = to_complex(pair.v());
    fft2(&mut uh, w, hgt, false);
    fft2(&mut vh, w, hgt, false);
    for ((xi2, a), b) in frequency_magnitudes(&grid).into_iter().zip(&mut uh).zip(&mut vh) {
        let [e11, e12, e21, e22] = expm_scaled(d, xi2 * sigma);
        let (x, y) = (*a, *b);
        *a = x * e11 + y * e12;
        *b = x * e21 + y * e22;
    }
    fft2(&mut uh, w, hgt, true);
    fft2(&mut vh, w, hgt, true);
    let scale = 1.0 / grid.len() as f64;
    let u = ScalarField::new(grid, uh.iter().map(|c| c.re * scale).collect())?;
    let v = ScalarField::new(grid, vh.iter().map(|c| c.re * scale).collect())?;
    ChannelPair::new(u, v)
}

/// The field handed to `g` under `strategy`. `solver_matrix` is the
/// smoothing base when the strategy does not name one.
pub fn edge_variable(
    pair: &ChannelPair,
    strategy: &EdgeVariableStrategy,
    solver_matrix: &DiffusionMatrix,
) -> Result<ScalarField> {
    match *strategy {
        EdgeVariableStrategy::Raw => Ok(pair.v().clone()),
        EdgeVariableStrategy::Cutoff { threshold } => cutoff(pair.v(), threshold),
        EdgeVariableStrategy::Smoothed { sigma, base } => {
            let d = base.unwrap_or(*solver_matrix);
            let smoothed = ksigma_convolve(pair, &d, sigma)?;
            Ok(smoothed.v().map(f64::abs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{preset, PresetName};

    fn grid(w: usize, h: usize) -> ImageGrid {
        ImageGrid::unit(w, h).unwrap()
    }

    /// Truncated Taylor series with scaling and squaring.
    fn expm_series(d: &DiffusionMatrix, t: f64) -> [f64; 4] {
        let a = [-t * d.d11, -t * d.d12, -t * d.d21, -t * d.d22];
        let norm = a.iter().map(|x| x.abs()).sum::<f64>();
        let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let s = 0.5f64.powi(squarings);
        let a = a.map(|x| x * s);
        let mul = |x: [f64; 4], y: [f64; 4]| {
            [
                x[0] * y[0] + x[1] * y[2],
                x[0] * y[1] + x[1] * y[3],
                x[2] * y[0] + x[3] * y[2],
                x[2] * y[1] + x[3] * y[3],
            ]
        };
        let mut term = [1.0, 0.0, 0.0, 1.0];
        let mut sum = term;
        for k in 1..30 {
            term = mul(term, a).map(|x| x / k as f64);
            for (s, t) in sum.iter_mut().zip(term) {
                *s += t;
            }
        }
        for _ in 0..squarings {
            sum = mul(sum, sum);
        }
        sum
    }

    #[test]
    fn expm_matches_series() {
        let mats = [
            DiffusionMatrix::IDENTITY,
            preset(PresetName::Ncdf1).unwrap().matrix,
            preset(PresetName::Ncdf2).unwrap().matrix,
            preset(PresetName::Ncdf5).unwrap().matrix,
            preset(PresetName::Ncdf6).unwrap().matrix,
            DiffusionMatrix::rotation(1.0),
        ];
        for d in mats {
            for t in [0.0, 1e-9, 0.01, 0.5, 2.0, 7.5] {
                let got = expm_scaled(&d, t);
                let want = expm_series(&d, t);
                for (g, w) in got.iter().zip(want) {
                    assert!((g - w).abs() < 1e-12, "{d} t={t}: {got:?} vs {want:?}");
                }
            }
        }
    }

    #[test]
    fn cutoff_examples() {
        let g = grid(3, 3);
        let five = ScalarField::constant(g, 5.0).unwrap();
        assert_eq!(cutoff(&five, 3.0).unwrap(), ScalarField::constant(g, 3.0).unwrap());
        let neg = ScalarField::constant(g, -2.0).unwrap();
        assert_eq!(cutoff(&neg, 3.0).unwrap(), neg);
        let small = ScalarField::from_fn(g, |i, j| (i * 3 + j) as f64 * 0.1).unwrap();
        assert_eq!(cutoff(&small, 1.0).unwrap(), small);
        assert!(matches!(cutoff(&small, 0.0), Err(Error::NonPositiveCutoff(_))));
    }

    #[test]
    fn sigma_zero_is_identity() {
        let g = grid(6, 5);
        let u = ScalarField::from_fn(g, |i, j| (i * 7 + j * 3) as f64).unwrap();
        let v = ScalarField::from_fn(g, |i, j| i as f64 - j as f64).unwrap();
        let pair = ChannelPair::new(u, v.clone()).unwrap();
        let d = preset(PresetName::Ncdf1).unwrap().matrix;
        assert_eq!(ksigma_convolve(&pair, &d, 0.0).unwrap(), pair);
        let w = edge_variable(
            &pair,
            &EdgeVariableStrategy::Smoothed {
                sigma: 0.0,
                base: None,
            },
            &d,
        )
        .unwrap();
        assert_eq!(w, v.map(f64::abs));
    }

    #[test]
    fn constants_are_fixed_points() {
        let g = grid(8, 6);
        let pair = ChannelPair::new(
            ScalarField::constant(g, 37.5).unwrap(),
            ScalarField::constant(g, -4.0).unwrap(),
        )
        .unwrap();
        for name in PresetName::NCDF {
            let d = preset(name).unwrap().matrix;
            for sigma in [0.5, 2.0, 10.0] {
                let out = ksigma_convolve(&pair, &d, sigma).unwrap();
                assert!(out.max_abs_diff(&pair).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_indefinite_base() {
        let g = grid(4, 4);
        let pair = ChannelPair::from_image(ScalarField::zeros(g));
        let d = DiffusionMatrix::new(1.0, 3.0, 3.0, 1.0).unwrap();
        assert!(matches!(
            ksigma_convolve(&pair, &d, 1.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn raw_and_cutoff_strategies() {
        let g = grid(4, 4);
        let u = ScalarField::from_fn(g, |i, j| (i * j) as f64).unwrap();
        let pair = ChannelPair::new(u, ScalarField::constant(g, 4.0).unwrap()).unwrap();
        let d = DiffusionMatrix::IDENTITY;
        let raw = edge_variable(&pair, &EdgeVariableStrategy::Raw, &d).unwrap();
        assert_eq!(raw, ScalarField::constant(g, 4.0).unwrap());

        let v = ScalarField::from_fn(g, |i, j| (i * 25 + j) as f64).unwrap();
        let pair = ChannelPair::new(pair.u().clone(), v.clone()).unwrap();
        let clipped =
            edge_variable(&pair, &EdgeVariableStrategy::Cutoff { threshold: 255.0 }, &d).unwrap();
        assert_eq!(clipped, v);
    }

    #[test]
    fn parse_strategies() {
        assert_eq!("raw".parse::<EdgeVariableStrategy>().unwrap(), EdgeVariableStrategy::Raw);
        assert_eq!(
            "cutoff:40".parse::<EdgeVariableStrategy>().unwrap(),
            EdgeVariableStrategy::Cutoff { threshold: 40.0 }
        );
        assert_eq!(
            "Smoothed:1.5".parse::<EdgeVariableStrategy>().unwrap(),
            EdgeVariableStrategy::Smoothed {
                sigma: 1.5,
                base: None
            }
        );
        assert!("cutoff:-1".parse::<EdgeVariableStrategy>().is_err());
        assert!("smoothed:-1".parse::<EdgeVariableStrategy>().is_err());
        assert!("blur".parse::<EdgeVariableStrategy>().is_err());
    }
}
