//! Quality metrics of a noisy image and of a blurred one against the clean
//! original.

use crossdiff::metrics::report;
use crossdiff::solver::run;
use crossdiff::synth::{generate, TestImage};
use crossdiff::{add_gaussian_noise, ChannelPair, DiffusionMatrix, EdgeStopping, ImageGrid, NoiseSpec, SolverConfig};

fn main() -> crossdiff::Result<()> {
    let clean = generate(TestImage::Checkerboard, ImageGrid::unit(64, 64)?);
    let noisy = add_gaussian_noise(&clean, &NoiseSpec::new(20.0, 3)?);
    let heat = SolverConfig::new(DiffusionMatrix::IDENTITY, EdgeStopping::new(10.0)?).with_dt(0.2);
    let blurred = run(&ChannelPair::from_image(clean.clone()), &heat, 25, &[])?.final_state;

    for (label, test) in [("clean", &clean), ("noisy", &noisy), ("blurred", blurred.u())] {
        let r = report(&clean, test)?;
        println!(
            "{label:<8} SNR {:>7.2} dB  PSNR {:>7.2} dB  RMSE {:>6.2}  NPB {:.3}",
            r.snr_db, r.psnr_db, r.rmse, r.npb
        );
    }
    Ok(())
}
