//! Denoising experiment: add seeded noise to a clean image, filter it with
//! several matrices and follow the quality metrics over time.

use std::fmt::Write as _;

use crate::error::Result;
use crate::field::{ChannelPair, ScalarField};
use crate::metrics::{add_gaussian_noise, npb, psnr, snr, MetricsReport, NoiseSpec, METRICS_CSV_HEADER};
use crate::solver::{run_observed, SolverConfig};

/// Metric curve of one filter run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCurve {
    pub label: String,
    pub times: Vec<f64>,
    pub reports: Vec<MetricsReport>,
    /// Step at which the run diverged, if it did.
    pub instability: Option<usize>,
}

impl MetricCurve {
    pub fn snr(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.snr_db).collect()
    }

    /// Index of the largest SNR value (first one on ties).
    pub fn peak_index(&self) -> usize {
        let snr = self.snr();
        let mut best = 0;
        for (k, &s) in snr.iter().enumerate() {
            if s > snr[best] {
                best = k;
            }
        }
        best
    }

    pub fn peak_time(&self) -> f64 {
        self.times[self.peak_index()]
    }

    pub fn peak_snr(&self) -> f64 {
        self.reports[self.peak_index()].snr_db
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(METRICS_CSV_HEADER);
        out.push('\n');
        for (t, r) in self.times.iter().zip(&self.reports) {
            out.push_str(&r.csv_row(*t));
            out.push('\n');
        }
        out
    }
}

/// True when `values` strictly increase up to a single maximum and strictly
/// decrease afterwards, with the maximum strictly inside the sequence.
pub fn is_single_peaked(values: &[f64]) -> bool {
    if values.len() < 3 {
        return false;
    }
    let peak = values
        .iter()
        .enumerate()
        .fold(0, |best, (k, &v)| if v > values[best] { k } else { best });
    if peak == 0 || peak == values.len() - 1 {
        return false;
    }
    values[..=peak].windows(2).all(|w| w[1] > w[0]) && values[peak..].windows(2).all(|w| w[1] < w[0])
}

/// Noisy initial image `S + N(σ′)`, optionally clipped to `[0, 255]`.
pub fn noisy_input(clean: &ScalarField, noise: &NoiseSpec, clip: bool) -> ScalarField {
    let noisy = add_gaussian_noise(clean, noise);
    if clip {
        noisy.map(|x| x.clamp(0.0, 255.0))
    } else {
        noisy
    }
}

/// Filters `noisy` (second channel zero) with `config` for `n_steps` steps
/// and records SNR, PSNR, RMSE and NPB of the first channel against `clean`
/// at every step.
pub fn metric_curve(
    label: &str,
    clean: &ScalarField,
    noisy: &ScalarField,
    config: &SolverConfig,
    n_steps: usize,
) -> Result<MetricCurve> {
    let pair = ChannelPair::from_image(noisy.clone());
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut reports = Vec::with_capacity(n_steps + 1);
    let mut failure = None;
    let traj = run_observed(&pair, config, n_steps, &[], |_, t, state| {
        let u = state.u();
        let outcome = snr(clean, u).and_then(|snr_db| {
            let (psnr_db, rmse) = psnr(clean, u)?;
            Ok(MetricsReport {
                snr_db,
                psnr_db,
                rmse,
                npb: npb(u),
            })
        });
        match outcome {
            Ok(r) => {
                times.push(t);
                reports.push(r);
            }
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(MetricCurve {
        label: label.to_string(),
        times,
        reports,
        instability: traj.instability,
    })
}

pub const SUMMARY_CSV_HEADER: &str = "preset,peak_snr_db,peak_t,psnr_at_peak_db,npb_at_peak,final_snr_db";

pub fn summary_csv(curves: &[MetricCurve]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for c in curves {
        let k = c.peak_index();
        let r = &c.reports[k];
        let last = c.reports.last().map_or(f64::NAN, |r| r.snr_db);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.label, r.snr_db, c.times[k], r.psnr_db, r.npb, last
        );
    }
    out
}
