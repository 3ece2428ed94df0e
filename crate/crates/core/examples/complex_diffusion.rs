//! Rotation matrices reproduce nonlinear complex diffusion: the second
//! channel behaves like a smoothed second derivative and marks edges.

use crossdiff::solver::{max_stable_dt, run};
use crossdiff::synth::{generate, TestImage};
use crossdiff::{ChannelPair, DiffusionMatrix, EdgeStopping, ImageGrid, SolverConfig};

fn main() -> crossdiff::Result<()> {
    let theta = std::f64::consts::PI / 30.0;
    let image = generate(TestImage::Steps, ImageGrid::unit(64, 16)?);
    let pair = ChannelPair::from_image(image);
    let config = SolverConfig::new(DiffusionMatrix::rotation(theta), EdgeStopping::complex(10.0, theta)?);
    println!("stability bound {:.4}, dt {}", max_stable_dt(&config, &pair), config.dt);

    let traj = run(&pair, &config, 100, &[])?;
    let v = traj.final_state.v();
    let row: Vec<String> = (0..64).map(|i| format!("{:+.2}", v.get(i, 8))).collect();
    println!("v along a row after t = {}:", traj.final_time());
    println!("{}", row.join(" "));
    Ok(())
}
