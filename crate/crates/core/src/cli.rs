//! Command-line front end.
//!
//! Every subcommand resolves a [`RunManifest`] from three layers: built-in
//! defaults, an optional TOML file given with `--config`, and command-line
//! flags, with later layers winning. Exit codes: 0 success, 1 a requested
//! property check failed, 2 usage or I/O error, 3 the solver diverged,
//! 4 degenerate (constant) reference image.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::diffusion::{preset_by_name, DiffusionMatrix, EdgeStopping};
use crate::error::{Error, Result};
use crate::experiment::{metric_curve, noisy_input, summary_csv};
use crate::field::{BoundaryMode, ChannelPair, ImageGrid, ScalarField};
use crate::metrics::{report, NoiseSpec, METRICS_CSV_HEADER};
use crate::pgm::{quantize, read_pgm, write_pgm, Quantization};
use crate::regularize::EdgeVariableStrategy;
use crate::scalespace::{entries_to_csv, entries_to_table, property_suite, DEFAULT_THRESHOLD};
use crate::solver::{max_stable_dt, monitors_to_csv, run, Scheme, SolverConfig};
use crate::synth::{generate, TestImage};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILED: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "crossdiff", version, about = "Nonlinear cross-diffusion image filtering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter an image and write snapshots plus the monitor log.
    Filter(RunArgs),
    /// Compare a test image against a reference.
    Metrics(MetricsArgs),
    /// Noise a clean image, filter it with several presets, log metric curves.
    Experiment(RunArgs),
    /// Write a synthetic test image.
    GenTestImage(GenArgs),
    /// Run the scale-space property checks.
    Properties(RunArgs),
}

/// Run parameters. Also the schema of the `--config` TOML file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunArgs {
    /// TOML file with any of these options (flags take precedence).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Input PGM image.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Synthetic image used when no input is given (shapes, disk, steps, checkerboard, ramp).
    #[arg(long)]
    pub synthetic: Option<String>,
    /// ncdf1..ncdf6 or rotation:<theta>.
    #[arg(long)]
    pub preset: Option<String>,
    /// Comma separated preset list (experiment, properties).
    #[arg(long, value_delimiter = ',')]
    pub presets: Option<Vec<String>>,
    /// Explicit matrix d11,d12,d21,d22; overrides --preset.
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// raw | cutoff:<M> | smoothed:<sigma>
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Comma separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// reflect | periodic
    #[arg(long)]
    pub boundary: Option<String>,
    /// fluxform | central
    #[arg(long)]
    pub scheme: Option<String>,
    /// Clamp the (noisy) input to [0, 255] before filtering.
    #[arg(long)]
    pub clip_input: bool,
    /// none | minmax, for the first channel of written snapshots.
    #[arg(long)]
    pub rescale: Option<String>,
    /// Also run the property suite (experiment).
    #[arg(long)]
    pub properties: bool,
    /// Steps per property check.
    #[arg(long)]
    pub property_steps: Option<usize>,
    #[arg(long)]
    pub out_prefix: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub out_prefix: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, default_value = "shapes")]
    pub kind: String,
    #[arg(long, default_value_t = 128)]
    pub width: usize,
    #[arg(long, default_value_t = 128)]
    pub height: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rescale {
    #[default]
    None,
    MinMax,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub input: Option<PathBuf>,
    pub synthetic: TestImage,
    /// Label and matrix of every preset to run; the first one is used by `filter`.
    pub presets: Vec<(String, DiffusionMatrix)>,
    pub kappa: f64,
    pub strategy: EdgeVariableStrategy,
    pub dt: f64,
    pub h: f64,
    pub steps: usize,
    pub snapshots: Vec<f64>,
    pub seed: u64,
    pub noise_sigma: Option<f64>,
    pub boundary: BoundaryMode,
    pub scheme: Scheme,
    pub clip_input: bool,
    pub rescale: Rescale,
    pub properties: bool,
    pub property_steps: usize,
    pub out_prefix: String,
}

fn parse_matrix(s: &str) -> Result<DiffusionMatrix> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidParameter(format!("bad matrix `{s}`")))?;
    match parts[..] {
        [a, b, c, d] => DiffusionMatrix::new(a, b, c, d)?.validated(),
        _ => Err(Error::InvalidParameter(format!("matrix needs four entries, got `{s}`"))),
    }
}

fn resolve_preset(name: &str) -> Result<(String, DiffusionMatrix)> {
    let p = preset_by_name(name)?;
    if let Some(w) = &p.warning {
        eprintln!("warning: {w}");
    }
    Ok((p.name.to_string(), p.matrix))
}

impl RunManifest {
    /// Merges flags over the config file (if any) over the defaults.
    pub fn resolve(flags: &RunArgs) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                toml::from_str::<RunArgs>(&text)
                    .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?
            }
            None => RunArgs::default(),
        };
        macro_rules! pick {
            ($field:ident) => {
                flags.$field.clone().or_else(|| file.$field.clone())
            };
        }

        let presets = if let Some(m) = pick!(matrix) {
            vec![("matrix".to_string(), parse_matrix(&m)?)]
        } else if let Some(list) = pick!(presets) {
            list.iter().map(|n| resolve_preset(n)).collect::<Result<Vec<_>>>()?
        } else if let Some(name) = pick!(preset) {
            vec![resolve_preset(&name)?]
        } else {
            Vec::new()
        };

        let manifest = Self {
            input: pick!(input),
            synthetic: pick!(synthetic).as_deref().unwrap_or("shapes").parse()?,
            presets,
            kappa: pick!(kappa).unwrap_or(10.0),
            strategy: pick!(strategy).as_deref().unwrap_or("raw").parse()?,
            dt: pick!(dt).unwrap_or(0.05),
            h: pick!(h).unwrap_or(1.0),
            steps: pick!(steps).unwrap_or(100),
            snapshots: pick!(snapshots).unwrap_or_default(),
            seed: pick!(seed).unwrap_or(0),
            noise_sigma: pick!(noise_sigma),
            boundary: pick!(boundary).as_deref().unwrap_or("reflect").parse()?,
            scheme: pick!(scheme).as_deref().unwrap_or("fluxform").parse()?,
            clip_input: flags.clip_input || file.clip_input,
            rescale: match pick!(rescale).as_deref().unwrap_or("none") {
                "none" => Rescale::None,
                "minmax" => Rescale::MinMax,
                other => return Err(Error::InvalidParameter(format!("unknown rescale `{other}`"))),
            },
            properties: flags.properties || file.properties,
            property_steps: pick!(property_steps).unwrap_or(100),
            out_prefix: pick!(out_prefix).unwrap_or_else(|| "crossdiff_out".to_string()),
        };
        manifest.solver_config(&DiffusionMatrix::IDENTITY)?;
        if !(manifest.h > 0.0) {
            return Err(Error::InvalidParameter(format!("h must be positive, got {}", manifest.h)));
        }
        Ok(manifest)
    }

    /// Presets to run, falling back to `defaults` when none were named.
    pub fn presets_or(&self, defaults: &[&str]) -> Result<Vec<(String, DiffusionMatrix)>> {
        if self.presets.is_empty() {
            defaults.iter().map(|n| resolve_preset(n)).collect()
        } else {
            Ok(self.presets.clone())
        }
    }

    pub fn solver_config(&self, matrix: &DiffusionMatrix) -> Result<SolverConfig> {
        let config = SolverConfig::new(*matrix, EdgeStopping::new(self.kappa)?)
            .with_strategy(self.strategy)
            .with_boundary(self.boundary)
            .with_scheme(self.scheme)
            .with_dt(self.dt);
        config.validate()?;
        Ok(config)
    }

    /// The clean input image: the PGM file, or the synthetic image.
    pub fn load_input(&self) -> Result<ScalarField> {
        match &self.input {
            Some(path) => read_pgm(path)?.to_field(self.h),
            None => Ok(generate(self.synthetic, ImageGrid::new(128, 128, self.h)?)),
        }
    }

    fn noise(&self, default_sigma: f64) -> Result<NoiseSpec> {
        NoiseSpec::new(self.noise_sigma.unwrap_or(default_sigma), self.seed)
    }
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn ensure_parent(prefix: &str) -> Result<()> {
    if let Some(parent) = Path::new(prefix).parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

fn write_snapshot(prefix: &str, t: f64, state: &ChannelPair, rescale: Rescale) -> Result<()> {
    let qu = match rescale {
        Rescale::None => Quantization::IDENTITY,
        Rescale::MinMax => Quantization::min_max(state.u()),
    };
    let qv = Quantization::symmetric(state.v());
    for (channel, field, q) in [("u", state.u(), qu), ("v", state.v(), qv)] {
        let path = format!("{prefix}_{channel}_t{t:.3}.pgm");
        write_pgm(&path, &quantize(field, q))?;
        write_text(format!("{path}.txt"), &q.sidecar())?;
    }
    Ok(())
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonFiniteState { .. } => EXIT_UNSTABLE,
        Error::DegenerateReference => EXIT_DEGENERATE,
        _ => EXIT_IO,
    }
}

fn report_error(err: &Error) -> i32 {
    eprintln!("error: {err}");
    exit_code(err)
}

pub fn cmd_filter(manifest: &RunManifest) -> i32 {
    match filter(manifest) {
        Ok(code) => code,
        Err(e) => report_error(&e),
    }
}

fn filter(manifest: &RunManifest) -> Result<i32> {
    let (label, matrix) = manifest.presets_or(&["ncdf1"])?.remove(0);
    let config = manifest.solver_config(&matrix)?;
    let clean = manifest.load_input()?;
    let u0 = match manifest.noise_sigma {
        Some(s) if s > 0.0 => noisy_input(&clean, &manifest.noise(s)?, manifest.clip_input),
        _ if manifest.clip_input => clean.map(|x| x.clamp(0.0, 255.0)),
        _ => clean,
    };
    let pair = ChannelPair::from_image(u0);
    let bound = max_stable_dt(&config, &pair);
    if config.dt > bound {
        eprintln!("warning: dt = {} exceeds the stability bound {bound} for {label}", config.dt);
    }
    let mut times = manifest.snapshots.clone();
    if times.is_empty() {
        times.push(manifest.steps as f64 * manifest.dt);
    }
    let traj = run(&pair, &config, manifest.steps, &times)?;

    let prefix = &manifest.out_prefix;
    ensure_parent(prefix)?;
    write_text(format!("{prefix}_monitor.csv"), &monitors_to_csv(&traj.monitors))?;
    for snap in &traj.snapshots {
        write_snapshot(prefix, snap.t, &snap.state, manifest.rescale)?;
    }
    if let Some(step) = traj.instability {
        eprintln!("error: state became non-finite at step {step}; monitor log written up to step {}", step - 1);
        return Ok(EXIT_UNSTABLE);
    }
    Ok(EXIT_OK)
}

pub fn cmd_metrics(reference: &Path, test: &Path, out_prefix: Option<&str>) -> i32 {
    let outcome = (|| -> Result<String> {
        let s = read_pgm(reference)?.to_field(1.0)?;
        let u = read_pgm(test)?.to_field(1.0)?;
        let r = report(&s, &u)?;
        println!("SNR  {} dB", r.snr_db);
        println!("PSNR {} dB", r.psnr_db);
        println!("RMSE {}", r.rmse);
        println!("NPB  {}", r.npb);
        let csv = format!("{METRICS_CSV_HEADER}\n{}\n", r.csv_row(0.0));
        if let Some(prefix) = out_prefix {
            ensure_parent(prefix)?;
            write_text(format!("{prefix}_metrics.csv"), &csv)?;
        }
        Ok(csv)
    })();
    match outcome {
        Ok(_) => EXIT_OK,
        Err(e) => report_error(&e),
    }
}

pub fn cmd_experiment(manifest: &RunManifest) -> i32 {
    match experiment(manifest) {
        Ok(code) => code,
        Err(e) => report_error(&e),
    }
}

fn experiment(manifest: &RunManifest) -> Result<i32> {
    let presets = manifest.presets_or(&["ncdf1", "ncdf2", "ncdf3"])?;
    let clean = manifest.load_input()?;
    let noisy = noisy_input(&clean, &manifest.noise(30.0)?, manifest.clip_input);
    let prefix = &manifest.out_prefix;
    ensure_parent(prefix)?;

    let mut curves = Vec::with_capacity(presets.len());
    let mut unstable = false;
    for (label, matrix) in &presets {
        let config = manifest.solver_config(matrix)?;
        let curve = metric_curve(label, &clean, &noisy, &config, manifest.steps)?;
        write_text(format!("{prefix}_{}_metrics.csv", file_label(label)), &curve.to_csv())?;
        if let Some(step) = curve.instability {
            eprintln!("error: {label} diverged at step {step}");
            unstable = true;
        }
        curves.push(curve);
    }
    let summary = summary_csv(&curves);
    write_text(format!("{prefix}_summary.csv"), &summary)?;
    print!("{summary}");
    if unstable {
        return Ok(EXIT_UNSTABLE);
    }

    if manifest.properties {
        let pair = ChannelPair::from_image(noisy);
        return properties_for(manifest, &presets, &pair);
    }
    Ok(EXIT_OK)
}

fn properties_for(manifest: &RunManifest, presets: &[(String, DiffusionMatrix)], pair: &ChannelPair) -> Result<i32> {
    let mut entries = Vec::new();
    for (label, matrix) in presets {
        let config = manifest.solver_config(matrix)?;
        entries.extend(property_suite(label, pair, &config, manifest.property_steps, DEFAULT_THRESHOLD)?);
    }
    print!("{}", entries_to_table(&entries));
    let prefix = &manifest.out_prefix;
    ensure_parent(prefix)?;
    write_text(format!("{prefix}_properties.csv"), &entries_to_csv(&entries))?;
    Ok(if entries.iter().all(|e| e.passed()) {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILED
    })
}

pub fn cmd_properties(manifest: &RunManifest) -> i32 {
    let outcome = (|| -> Result<i32> {
        let presets = manifest.presets_or(&["ncdf1", "ncdf2", "ncdf3", "ncdf4", "ncdf5", "ncdf6"])?;
        let clean = manifest.load_input()?;
        let u0 = noisy_input(&clean, &manifest.noise(0.0)?, manifest.clip_input);
        properties_for(manifest, &presets, &ChannelPair::from_image(u0))
    })();
    match outcome {
        Ok(code) => code,
        Err(e) => report_error(&e),
    }
}

pub fn cmd_gen_test_image(args: &GenArgs) -> i32 {
    let outcome = (|| -> Result<()> {
        let kind: TestImage = args.kind.parse()?;
        let field = generate(kind, ImageGrid::unit(args.width, args.height)?);
        if let Some(parent) = args.out.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        write_pgm(&args.out, &quantize(&field, Quantization::IDENTITY))
    })();
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(&e),
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    let with_manifest = |args: &RunArgs, f: fn(&RunManifest) -> i32| match RunManifest::resolve(args) {
        Ok(m) => f(&m),
        Err(e) => report_error(&e),
    };
    match &cli.command {
        Command::Filter(a) => with_manifest(a, cmd_filter),
        Command::Experiment(a) => with_manifest(a, cmd_experiment),
        Command::Properties(a) => with_manifest(a, cmd_properties),
        Command::Metrics(a) => cmd_metrics(&a.reference, &a.test, a.out_prefix.as_deref()),
        Command::GenTestImage(a) => cmd_gen_test_image(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> RunArgs {
        let mut full = vec!["crossdiff", "filter"];
        full.extend_from_slice(list);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Filter(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults() {
        let m = RunManifest::resolve(&args(&[])).unwrap();
        assert_eq!((m.dt, m.h, m.kappa), (0.05, 1.0, 10.0));
        assert_eq!(m.strategy, EdgeVariableStrategy::Raw);
        assert_eq!(m.boundary, BoundaryMode::Reflect);
        assert_eq!(m.scheme, Scheme::FluxForm);
        assert!(m.presets.is_empty());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "dt = 0.02\nkappa = 4.0\nstrategy = \"cutoff:50\"\npreset = \"ncdf5\"\n").unwrap();
        let p = path.to_str().unwrap();
        let m = RunManifest::resolve(&args(&["--config", p, "--kappa", "7"])).unwrap();
        assert_eq!(m.dt, 0.02);
        assert_eq!(m.kappa, 7.0);
        assert_eq!(m.strategy, EdgeVariableStrategy::Cutoff { threshold: 50.0 });
        assert_eq!(m.presets[0].0, "ncdf5");
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "dtt = 0.02\n").unwrap();
        assert!(RunManifest::resolve(&args(&["--config", path.to_str().unwrap()])).is_err());
    }

    #[test]
    fn explicit_matrix_wins() {
        let m = RunManifest::resolve(&args(&["--preset", "ncdf2", "--matrix", "1,-0.5,0.5,1"])).unwrap();
        assert_eq!(m.presets, vec![("matrix".to_string(), DiffusionMatrix::new(1.0, -0.5, 0.5, 1.0).unwrap())]);
        assert!(RunManifest::resolve(&args(&["--matrix", "1,2,3"])).is_err());
        assert!(RunManifest::resolve(&args(&["--matrix", "1,3,3,1"])).is_err());
    }

    #[test]
    fn invalid_values() {
        assert!(RunManifest::resolve(&args(&["--dt=-1"])).is_err());
        assert!(RunManifest::resolve(&args(&["--boundary", "mirror"])).is_err());
        assert!(RunManifest::resolve(&args(&["--preset", "ncdf9"])).is_err());
    }

    #[test]
    fn file_labels() {
        assert_eq!(file_label("rotation:0.5"), "rotation_0.5");
    }
}
