//! Brackets the explicit time-step bound for the heat equation: below it the
//! energy decreases, above it the checkerboard mode blows up.

use crossdiff::solver::{max_stable_dt, run};
use crossdiff::synth::{generate, TestImage};
use crossdiff::{ChannelPair, DiffusionMatrix, EdgeStopping, ImageGrid, SolverConfig};

fn main() -> crossdiff::Result<()> {
    let pair = ChannelPair::from_image(generate(TestImage::Checkerboard, ImageGrid::unit(32, 32)?));
    let base = SolverConfig::new(DiffusionMatrix::IDENTITY, EdgeStopping::new(10.0)?);
    println!("bound: {}", max_stable_dt(&base, &pair));
    for dt in [0.1, 0.2, 0.25, 0.3] {
        let traj = run(&pair, &base.with_dt(dt), 300, &[])?;
        let grew = traj.monitors.windows(2).any(|w| w[1].energy > w[0].energy);
        let end = traj.monitors.last().map_or(f64::NAN, |m| m.energy);
        match traj.instability {
            Some(step) => println!("dt {dt:<5} non-finite at step {step}"),
            None => println!("dt {dt:<5} final energy {end:.3e}, energy ever increased: {grew}"),
        }
    }
    Ok(())
}
