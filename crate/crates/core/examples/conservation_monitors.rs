//! Runs a random pair through 300 steps and prints the monitor log at a few
//! times: masses stay fixed, energy decreases.

use crossdiff::diffusion::{preset, PresetName};
use crossdiff::solver::{run, MONITOR_CSV_HEADER};
use crossdiff::{ChannelPair, EdgeStopping, ImageGrid, ScalarField, SolverConfig};

fn main() -> crossdiff::Result<()> {
    let grid = ImageGrid::unit(32, 32)?;
    // deterministic pseudo-random data without pulling in an RNG
    let hash = |i: usize, j: usize, salt: u64| {
        let x = (i as u64 * 73_856_093) ^ (j as u64 * 19_349_663) ^ salt;
        (x.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40) as f64 / (1u64 << 24) as f64
    };
    let u = ScalarField::from_fn(grid, |i, j| 255.0 * hash(i, j, 1))?;
    let v = ScalarField::from_fn(grid, |i, j| 20.0 * hash(i, j, 2) - 10.0)?;
    let pair = ChannelPair::new(u, v)?;

    let config = SolverConfig::new(preset(PresetName::Ncdf5)?.matrix, EdgeStopping::new(10.0)?);
    let traj = run(&pair, &config, 300, &[])?;
    println!("{MONITOR_CSV_HEADER}");
    for m in traj.monitors.iter().step_by(50) {
        println!(
            "t={:>5.2} mass_u={:.6} mass_v={:.6} energy={:.3} dist_to_mean={:.3}",
            m.t, m.mass_u, m.mass_v, m.energy, m.dist_to_mean
        );
    }
    Ok(())
}
