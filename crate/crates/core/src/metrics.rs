//! Restoration quality metrics and seeded Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Peak value used by PSNR.
pub const PEAK: f64 = 255.0;

/// Number of taps of the low-pass filter in the blur metric.
pub const NPB_TAPS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub snr_db: f64,
    pub psnr_db: f64,
    pub rmse: f64,
    /// Blur estimate of the test image, 0 (sharp) to 1 (blurred).
    pub npb: f64,
}

pub const METRICS_CSV_HEADER: &str = "t,snr_db,psnr_db,rmse,npb";

impl MetricsReport {
    pub fn csv_row(&self, t: f64) -> String {
        format!("{},{},{},{},{}", t, self.snr_db, self.psnr_db, self.rmse, self.npb)
    }
}

/// Mean squared deviation from the mean.
pub fn variance(image: &ScalarField) -> f64 {
    let mean = image.mean();
    let ss: f64 = image.values().iter().map(|&x| (x - mean) * (x - mean)).sum();
    ss / image.values().len() as f64
}

fn check_same_grid(a: &ScalarField, b: &ScalarField) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `10 log10(Var(S) / Var(U − S))`, `+∞` when the error has no variance.
pub fn snr(reference: &ScalarField, test: &ScalarField) -> Result<f64> {
    check_same_grid(reference, test)?;
    let signal = variance(reference);
    if signal == 0.0 {
        return Err(Error::DegenerateReference);
    }
    let diff: Vec<f64> = test
        .values()
        .iter()
        .zip(reference.values())
        .map(|(u, s)| u - s)
        .collect();
    let noise = variance(&ScalarField::from_raw(*reference.grid(), diff));
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}

/// Root-mean-square error `‖S − U‖_F / √(N1 N2)`.
pub fn rmse(reference: &ScalarField, test: &ScalarField) -> Result<f64> {
    check_same_grid(reference, test)?;
    let ss: f64 = reference
        .values()
        .iter()
        .zip(test.values())
        .map(|(s, u)| (s - u) * (s - u))
        .sum();
    Ok((ss / reference.values().len() as f64).sqrt())
}

/// PSNR in dB from an RMSE value.
pub fn psnr_from_rmse(rmse: f64) -> f64 {
    if rmse == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (PEAK / rmse).log10()
    }
}

/// Returns `(psnr_db, rmse)`.
pub fn psnr(reference: &ScalarField, test: &ScalarField) -> Result<(f64, f64)> {
    let e = rmse(reference, test)?;
    Ok((psnr_from_rmse(e), e))
}

/// Direction of the 1D filtering and differencing in [`npb`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Horizontal,
    Vertical,
}

/// Blur estimate along one axis.
fn directional_blur(image: &ScalarField, axis: Axis) -> f64 {
    let grid = image.grid();
    let (w, hgt) = (grid.width(), grid.height());
    let (len, lines) = match axis {
        Axis::Horizontal => (w, hgt),
        Axis::Vertical => (hgt, w),
    };
    let at = |line: usize, k: usize| match axis {
        Axis::Horizontal => image.get(k, line),
        Axis::Vertical => image.get(line, k),
    };
    let half = (NPB_TAPS / 2) as isize;
    let mut s_d = 0.0;
    let mut s_v = 0.0;
    let mut blurred = vec![0.0; len];
    for line in 0..lines {
        for (k, b) in blurred.iter_mut().enumerate() {
            let mut acc = 0.0;
            for o in -half..=half {
                let idx = (k as isize + o).clamp(0, len as isize - 1) as usize;
                acc += at(line, idx);
            }
            *b = acc / NPB_TAPS as f64;
        }
        for k in 1..len {
            let d_orig = (at(line, k) - at(line, k - 1)).abs();
            let d_blur = (blurred[k] - blurred[k - 1]).abs();
            s_d += d_orig;
            s_v += (d_orig - d_blur).max(0.0);
        }
    }
    if s_d == 0.0 {
        return 0.0;
    }
    ((s_d - s_v) / s_d).clamp(0.0, 1.0)
}

/// No-reference perceptual blur: compares neighbour variations before and
/// after a 9-tap box filter along each axis and returns the worse axis.
/// A constant image scores 0.
pub fn npb(image: &ScalarField) -> f64 {
    directional_blur(image, Axis::Horizontal).max(directional_blur(image, Axis::Vertical))
}

/// SNR, PSNR, RMSE of `test` against `reference`, and the blur of `test`.
pub fn report(reference: &ScalarField, test: &ScalarField) -> Result<MetricsReport> {
    let snr_db = snr(reference, test)?;
    let (psnr_db, rmse) = psnr(reference, test)?;
    Ok(MetricsReport {
        snr_db,
        psnr_db,
        rmse,
        npb: npb(test),
    })
}

/// Zero-mean Gaussian noise of standard deviation `sigma_prime`, seeded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma_prime: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma_prime: f64, seed: u64) -> Result<Self> {
        if !(sigma_prime >= 0.0) || !sigma_prime.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise standard deviation must be non-negative, got {sigma_prime}"
            )));
        }
        Ok(Self { sigma_prime, seed })
    }

    /// Standard normal draw for pixel `index`. Each pixel owns its own
    /// ChaCha stream, so the value does not depend on traversal order.
    pub fn standard_normal(&self, index: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        StandardNormal.sample(&mut rng)
    }
}

/// Adds i.i.d. `N(0, σ′²)` noise. No clipping.
pub fn add_gaussian_noise(image: &ScalarField, spec: &NoiseSpec) -> ScalarField {
    if spec.sigma_prime == 0.0 {
        return image.clone();
    }
    let values = image
        .values()
        .iter()
        .enumerate()
        .map(|(k, &x)| x + spec.sigma_prime * spec.standard_normal(k))
        .collect();
    ScalarField::from_raw(*image.grid(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ImageGrid;

    fn field(w: usize, h: usize, f: impl FnMut(usize, usize) -> f64) -> ScalarField {
        ScalarField::from_fn(ImageGrid::unit(w, h).unwrap(), f).unwrap()
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance(&field(4, 3, |_, _| 9.0)), 0.0);
        let checker = field(6, 4, |i, j| if (i + j) % 2 == 0 { 10.0 - 3.0 } else { 10.0 + 3.0 });
        assert!((variance(&checker) - 9.0).abs() < 1e-12);
        let values = [0.0, 0.0, 0.0, 4.0];
        let mean = values.iter().sum::<f64>() / 4.0;
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
        assert_eq!(var, 3.0);
    }

    #[test]
    fn snr_examples() {
        let s = field(4, 4, |i, j| if (i + j) % 2 == 0 { 0.0 } else { 2.0 });
        // Var(S) = 1. Error equal to S itself gives ratio 1.
        let u = field(4, 4, |i, j| 2.0 * s.get(i, j));
        assert!(snr(&s, &u).unwrap().abs() < 1e-12);
        // Error S/10 gives ratio 100.
        let u = field(4, 4, |i, j| 1.1 * s.get(i, j));
        assert!((snr(&s, &u).unwrap() - 20.0).abs() < 1e-12);
        let shifted = s.map(|x| x + 17.0);
        assert_eq!(snr(&s, &shifted).unwrap(), f64::INFINITY);
        let flat = field(4, 4, |_, _| 3.0);
        assert!(matches!(snr(&flat, &s), Err(Error::DegenerateReference)));
    }

    #[test]
    fn psnr_examples() {
        assert_eq!(psnr_from_rmse(255.0), 0.0);
        assert!((psnr_from_rmse(2.55) - 40.0).abs() < 1e-12);
        let s = field(5, 5, |i, j| (i * j) as f64);
        assert_eq!(psnr(&s, &s).unwrap(), (f64::INFINITY, 0.0));
        let u = s.map(|x| x + 2.55);
        let (p, e) = psnr(&s, &u).unwrap();
        assert!((e - 2.55).abs() < 1e-12 && (p - 40.0).abs() < 1e-9);
    }

    #[test]
    fn grids_must_match() {
        let a = field(4, 4, |_, _| 1.0);
        let b = field(5, 4, |_, _| 1.0);
        assert!(matches!(snr(&a, &b), Err(Error::GridMismatch)));
        assert!(matches!(psnr(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn npb_constant_is_zero() {
        assert_eq!(npb(&field(9, 7, |_, _| 42.0)), 0.0);
    }

    #[test]
    fn npb_step_edge_vs_blurred() {
        let sharp = field(32, 32, |i, _| if i < 16 { 40.0 } else { 200.0 });
        let blurred = field(32, 32, |i, _| {
            let mut acc = 0.0;
            for o in -4isize..=4 {
                let k = (i as isize + o).clamp(0, 31) as usize;
                acc += if k < 16 { 40.0 } else { 200.0 };
            }
            acc / 9.0
        });
        let (a, b) = (npb(&sharp), npb(&blurred));
        assert!(b > a, "blurred {b} sharp {a}");
        assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
    }

    #[test]
    fn noise_zero_sigma_is_identity() {
        let img = field(8, 8, |i, j| (i + 3 * j) as f64);
        assert_eq!(add_gaussian_noise(&img, &NoiseSpec::new(0.0, 3).unwrap()), img);
    }

    #[test]
    fn noise_is_deterministic_and_seed_dependent() {
        let img = field(8, 8, |_, _| 0.0);
        let a = add_gaussian_noise(&img, &NoiseSpec::new(5.0, 11).unwrap());
        let b = add_gaussian_noise(&img, &NoiseSpec::new(5.0, 11).unwrap());
        let c = add_gaussian_noise(&img, &NoiseSpec::new(5.0, 12).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_statistics() {
        let img = field(128, 128, |_, _| 0.0);
        let noisy = add_gaussian_noise(&img, &NoiseSpec::new(30.0, 2024).unwrap());
        let mean = noisy.mean();
        let std = variance(&noisy).sqrt();
        assert!((-1.0..=1.0).contains(&mean), "mean {mean}");
        assert!((29.4..=30.6).contains(&std), "std {std}");
    }

    #[test]
    fn noise_spec_validation() {
        assert!(NoiseSpec::new(-1.0, 0).is_err());
        assert!(NoiseSpec::new(f64::NAN, 0).is_err());
    }
}
