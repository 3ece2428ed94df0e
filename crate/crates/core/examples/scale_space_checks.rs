//! Runs the scale-space property suite for two presets and the long-time
//! decay fit for one of them.

use crossdiff::diffusion::{preset, PresetName};
use crossdiff::scalespace::{asymptotic_decay, entries_to_table, property_suite, DEFAULT_THRESHOLD};
use crossdiff::synth::{generate, TestImage};
use crossdiff::{ChannelPair, EdgeStopping, ImageGrid, SolverConfig};

fn main() -> crossdiff::Result<()> {
    let image = generate(TestImage::Disk, ImageGrid::unit(32, 32)?);
    let pair = ChannelPair::from_image(image);
    let mut entries = Vec::new();
    for name in [PresetName::Ncdf1, PresetName::Ncdf5] {
        let config = SolverConfig::new(preset(name)?.matrix, EdgeStopping::new(10.0)?);
        entries.extend(property_suite(&name.to_string(), &pair, &config, 50, DEFAULT_THRESHOLD)?);
    }
    print!("{}", entries_to_table(&entries));

    let config = SolverConfig::new(preset(PresetName::Ncdf1)?.matrix, EdgeStopping::new(10.0)?);
    let decay = asymptotic_decay(&pair, &config, 2000)?;
    println!("asymptotic decay: {}", decay.detail);
    Ok(())
}
