//! Compares the three edge variables on the same noisy image: the raw second
//! channel, its cutoff and the matrix-Gaussian smoothed version.

use crossdiff::diffusion::{preset, PresetName};
use crossdiff::experiment::{metric_curve, noisy_input};
use crossdiff::synth::{generate, TestImage};
use crossdiff::{EdgeStopping, EdgeVariableStrategy, ImageGrid, NoiseSpec, SolverConfig};

fn main() -> crossdiff::Result<()> {
    let clean = generate(TestImage::Shapes, ImageGrid::unit(96, 96)?);
    let noisy = noisy_input(&clean, &NoiseSpec::new(30.0, 1)?, false);
    let d = preset(PresetName::Ncdf1)?.matrix;
    for strategy in [
        EdgeVariableStrategy::Raw,
        EdgeVariableStrategy::Cutoff { threshold: 5.0 },
        EdgeVariableStrategy::Smoothed { sigma: 1.0, base: None },
    ] {
        let config = SolverConfig::new(d, EdgeStopping::new(10.0)?).with_strategy(strategy);
        let curve = metric_curve(&format!("{strategy:?}"), &clean, &noisy, &config, 60)?;
        println!(
            "{:<50} peak SNR {:6.2} dB at t = {:.2}",
            curve.label,
            curve.peak_snr(),
            curve.peak_time()
        );
    }
    Ok(())
}
