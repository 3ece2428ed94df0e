//! Adds Gaussian noise to a synthetic image, filters it with NCDF2 and
//! writes the noisy input and the filtered channels as PGM files.
//!
//! `cargo run --example filter_noisy_image -- [out_dir]`

use std::path::PathBuf;

use crossdiff::diffusion::{preset, PresetName};
use crossdiff::metrics::report;
use crossdiff::pgm::{quantize, write_pgm, Quantization};
use crossdiff::solver::run;
use crossdiff::synth::{generate, TestImage};
use crossdiff::{add_gaussian_noise, ChannelPair, EdgeStopping, ImageGrid, NoiseSpec, SolverConfig};

fn main() -> crossdiff::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/example_out".into()));
    std::fs::create_dir_all(&out)?;

    let clean = generate(TestImage::Shapes, ImageGrid::unit(128, 128)?);
    let noisy = add_gaussian_noise(&clean, &NoiseSpec::new(30.0, 7)?);
    let config = SolverConfig::new(preset(PresetName::Ncdf2)?.matrix, EdgeStopping::new(10.0)?);

    let traj = run(&ChannelPair::from_image(noisy.clone()), &config, 12, &[])?;
    traj.check()?;
    let filtered = &traj.final_state;

    println!("noisy:    {:?}", report(&clean, &noisy)?);
    println!("filtered: {:?}", report(&clean, filtered.u())?);

    write_pgm(out.join("noisy.pgm"), &quantize(&noisy, Quantization::IDENTITY))?;
    write_pgm(out.join("filtered_u.pgm"), &quantize(filtered.u(), Quantization::IDENTITY))?;
    // the second channel is signed and small; centre it on mid-grey
    write_pgm(out.join("filtered_v.pgm"), &quantize(filtered.v(), Quantization::symmetric(filtered.v())))?;
    println!("wrote images to {}", out.display());
    Ok(())
}
