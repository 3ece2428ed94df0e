//! Executable scale-space checks.
//!
//! Each invariance check evolves an input and a transformed copy with the
//! same solver, undoes the transform on the second result and reports the
//! largest pointwise disagreement. The decay check fits the exponential
//! approach of the state to its channel means.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::field::{BoundaryMode, ChannelPair};
use crate::regularize::EdgeVariableStrategy;
use crate::solver::{run, SolverConfig};

/// Default pass threshold for transform/evolve commutation, max-abs.
pub const DEFAULT_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvarianceKind {
    GreyShift,
    ReverseContrast,
    Translation,
    AverageGrey,
    AsymptoticDecay,
}

impl fmt::Display for InvarianceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InvarianceKind::GreyShift => "grey_shift",
            InvarianceKind::ReverseContrast => "reverse_contrast",
            InvarianceKind::Translation => "translation",
            InvarianceKind::AverageGrey => "average_grey",
            InvarianceKind::AsymptoticDecay => "asymptotic_decay",
        };
        f.write_str(s)
    }
}

/// A transform together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InvarianceCheck {
    /// Add `(c1, c2)` to the initial pair.
    GreyShift { c1: f64, c2: f64 },
    ReverseContrast,
    /// Cyclic shift by `(dx, dy)` pixels; needs periodic boundaries.
    Translation { dx: isize, dy: isize },
    AverageGrey,
}

impl InvarianceCheck {
    pub fn kind(&self) -> InvarianceKind {
        match self {
            InvarianceCheck::GreyShift { .. } => InvarianceKind::GreyShift,
            InvarianceCheck::ReverseContrast => InvarianceKind::ReverseContrast,
            InvarianceCheck::Translation { .. } => InvarianceKind::Translation,
            InvarianceCheck::AverageGrey => InvarianceKind::AverageGrey,
        }
    }
}

/// Least-squares fit of `ln(dist_to_mean)` against `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the fit, in natural-log units.
    pub rms_residual: f64,
    /// `dist_to_mean(end) / dist_to_mean(0)`.
    pub final_ratio: f64,
    /// Whether `final_ratio` reached the requested target.
    pub conclusive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub kind: InvarianceKind,
    pub max_abs_deviation: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
    pub decay: Option<DecayFit>,
}

fn check_report(kind: InvarianceKind, deviation: f64, threshold: f64, detail: String) -> InvarianceReport {
    InvarianceReport {
        kind,
        max_abs_deviation: deviation,
        threshold,
        pass: deviation <= threshold,
        detail,
        decay: None,
    }
}

fn evolve(pair: &ChannelPair, config: &SolverConfig, n_steps: usize) -> Result<ChannelPair> {
    let traj = run(pair, config, n_steps, &[])?;
    traj.check()?;
    Ok(traj.final_state)
}

/// Runs one transform/evolve commutation check.
///
/// Combinations for which the identity does not hold for the discrete
/// scheme are refused with [`Error::UnsupportedCombination`]: a grey shift
/// touching the second channel (every edge variable depends on `v`), contrast
/// reversal with the cutoff edge variable (`min(v, M)` is not odd), and
/// translation without periodic boundaries.
pub fn check_invariance(
    check: InvarianceCheck,
    pair: &ChannelPair,
    config: &SolverConfig,
    n_steps: usize,
    threshold: f64,
) -> Result<InvarianceReport> {
    let kind = check.kind();
    match check {
        InvarianceCheck::GreyShift { c1, c2 } => {
            if c2 != 0.0 {
                return Err(Error::UnsupportedCombination(format!(
                    "grey shift with c2 = {c2}: the edge variable depends on v"
                )));
            }
            let base = evolve(pair, config, n_steps)?;
            let shifted = evolve(&pair.shifted(c1, c2), config, n_steps)?;
            let deviation = shifted.shifted(-c1, -c2).max_abs_diff(&base)?;
            Ok(check_report(kind, deviation, threshold, format!("C = ({c1}, {c2}), {n_steps} steps")))
        }
        InvarianceCheck::ReverseContrast => {
            if let EdgeVariableStrategy::Cutoff { .. } = config.strategy {
                return Err(Error::UnsupportedCombination(
                    "contrast reversal with the cutoff edge variable".into(),
                ));
            }
            let base = evolve(pair, config, n_steps)?;
            let reversed = evolve(&pair.negated(), config, n_steps)?;
            let deviation = reversed.negated().max_abs_diff(&base)?;
            Ok(check_report(kind, deviation, threshold, format!("{n_steps} steps")))
        }
        InvarianceCheck::Translation { dx, dy } => {
            if config.boundary != BoundaryMode::Periodic {
                return Err(Error::UnsupportedCombination(
                    "translation check needs periodic boundaries".into(),
                ));
            }
            let base = evolve(pair, config, n_steps)?;
            let moved = evolve(&pair.rolled(dx, dy), config, n_steps)?;
            let deviation = moved.rolled(-dx, -dy).max_abs_diff(&base)?;
            Ok(check_report(kind, deviation, threshold, format!("shift ({dx}, {dy}), {n_steps} steps")))
        }
        InvarianceCheck::AverageGrey => {
            let end = evolve(pair, config, n_steps)?;
            let du = (end.u().mean() - pair.u().mean()).abs();
            let dv = (end.v().mean() - pair.v().mean()).abs();
            Ok(check_report(
                kind,
                du.max(dv),
                threshold,
                format!("mean drift u {du:e}, v {dv:e} after {n_steps} steps"),
            ))
        }
    }
}

/// Settings of [`asymptotic_decay_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayOptions {
    /// Fraction of the trajectory skipped before fitting; 0 fits all samples.
    pub fit_from: f64,
    /// The run is conclusive once `dist_to_mean` drops below this fraction
    /// of its initial value.
    pub target_ratio: f64,
    /// Largest RMS residual of the log-linear fit that still counts as
    /// exponential decay.
    pub max_rms_residual: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self {
            fit_from: 0.5,
            target_ratio: 1e-3,
            max_rms_residual: 0.1,
        }
    }
}

/// Ordinary least squares `y ≈ slope·x + intercept`, with the RMS residual.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

pub fn asymptotic_decay(pair: &ChannelPair, config: &SolverConfig, n_steps: usize) -> Result<InvarianceReport> {
    asymptotic_decay_with(pair, config, n_steps, &DecayOptions::default())
}

/// Fits the exponential decay of the distance to the channel means.
///
/// Passes when the fit is conclusive, the slope is negative and the
/// residual is small.
pub fn asymptotic_decay_with(
    pair: &ChannelPair,
    config: &SolverConfig,
    n_steps: usize,
    options: &DecayOptions,
) -> Result<InvarianceReport> {
    let traj = run(pair, config, n_steps, &[])?;
    traj.check()?;
    let initial = traj.monitors[0].dist_to_mean;
    if initial == 0.0 {
        return Err(Error::DegenerateInput("initial state already equals its mean".into()));
    }
    let skip = ((traj.monitors.len() as f64) * options.fit_from.clamp(0.0, 1.0)) as usize;
    let (t, log_d): (Vec<f64>, Vec<f64>) = traj.monitors[skip.min(traj.monitors.len() - 1)..]
        .iter()
        .filter(|m| m.dist_to_mean > 0.0)
        .map(|m| (m.t, m.dist_to_mean.ln()))
        .unzip();
    if t.len() < 2 {
        return Err(Error::DegenerateInput("too few samples to fit a decay rate".into()));
    }
    let (slope, intercept, rms_residual) = fit_line(&t, &log_d);
    let final_ratio = traj.monitors.last().map_or(1.0, |m| m.dist_to_mean) / initial;
    let conclusive = final_ratio < options.target_ratio;
    let pass = conclusive && slope < 0.0 && rms_residual <= options.max_rms_residual;
    let mut detail = format!(
        "slope {slope:e}, rms residual {rms_residual:e}, final/initial {final_ratio:e}"
    );
    if !conclusive {
        let _ = write!(detail, " (inconclusive: target {:e} not reached)", options.target_ratio);
    }
    Ok(InvarianceReport {
        kind: InvarianceKind::AsymptoticDecay,
        max_abs_deviation: final_ratio,
        threshold: options.target_ratio,
        pass,
        detail,
        decay: Some(DecayFit {
            slope,
            intercept,
            rms_residual,
            final_ratio,
            conclusive,
        }),
    })
}

/// Outcome of one entry of the property suite.
#[derive(Debug, Clone, PartialEq)]
pub enum PropertyOutcome {
    Checked(InvarianceReport),
    /// The combination is refused; not counted as a failure.
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyEntry {
    pub label: String,
    pub kind: InvarianceKind,
    pub outcome: PropertyOutcome,
}

impl PropertyEntry {
    pub fn passed(&self) -> bool {
        match &self.outcome {
            PropertyOutcome::Checked(r) => r.pass,
            PropertyOutcome::Unsupported(_) => true,
        }
    }
}

/// Grey shift `(50, 0)`, contrast reversal, average grey, and a periodic
/// translation by `(3, 5)`, all over `n_steps` steps.
pub fn property_suite(
    label: &str,
    pair: &ChannelPair,
    config: &SolverConfig,
    n_steps: usize,
    threshold: f64,
) -> Result<Vec<PropertyEntry>> {
    let periodic = config.with_boundary(BoundaryMode::Periodic);
    let checks = [
        (InvarianceCheck::GreyShift { c1: 50.0, c2: 0.0 }, *config),
        (InvarianceCheck::ReverseContrast, *config),
        (InvarianceCheck::AverageGrey, *config),
        (InvarianceCheck::Translation { dx: 3, dy: 5 }, periodic),
    ];
    let mut out = Vec::with_capacity(checks.len());
    for (check, cfg) in checks {
        let outcome = match check_invariance(check, pair, &cfg, n_steps, threshold) {
            Ok(report) => PropertyOutcome::Checked(report),
            Err(Error::UnsupportedCombination(why)) => PropertyOutcome::Unsupported(why),
            Err(e) => return Err(e),
        };
        out.push(PropertyEntry {
            label: label.to_string(),
            kind: check.kind(),
            outcome,
        });
    }
    Ok(out)
}

pub const REPORT_CSV_HEADER: &str = "label,kind,deviation,threshold,pass";

/// `label,kind,deviation,threshold,pass` rows; unsupported entries carry
/// empty numeric fields and `pass = skipped`.
pub fn entries_to_csv(entries: &[PropertyEntry]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for e in entries {
        match &e.outcome {
            PropertyOutcome::Checked(r) => {
                let _ = writeln!(out, "{},{},{},{},{}", e.label, e.kind, r.max_abs_deviation, r.threshold, r.pass);
            }
            PropertyOutcome::Unsupported(_) => {
                let _ = writeln!(out, "{},{},,,skipped", e.label, e.kind);
            }
        }
    }
    out
}

/// Fixed-width table for terminals.
pub fn entries_to_table(entries: &[PropertyEntry]) -> String {
    let mut out = format!(
        "{:<14} {:<18} {:>12} {:>10}  {}\n",
        "label", "check", "deviation", "threshold", "result"
    );
    for e in entries {
        match &e.outcome {
            PropertyOutcome::Checked(r) => {
                let _ = writeln!(
                    out,
                    "{:<14} {:<18} {:>12.3e} {:>10.1e}  {}",
                    e.label,
                    e.kind.to_string(),
                    r.max_abs_deviation,
                    r.threshold,
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            PropertyOutcome::Unsupported(why) => {
                let _ = writeln!(out, "{:<14} {:<18} {:>12} {:>10}  SKIP ({why})", e.label, e.kind.to_string(), "-", "-");
            }
        }
    }
    out
}
