//! Lists the built-in matrices with their ellipticity, eigenvalue
//! discriminant and stability bound.

use crossdiff::diffusion::{preset, PresetName};
use crossdiff::solver::generic_stable_dt;
use crossdiff::eigen_discriminant;

fn main() -> crossdiff::Result<()> {
    println!("{:<14} {:>27} {:>10} {:>10} {:>9}", "preset", "d11 d12 d21 d22", "alpha", "s", "dt_max");
    let mut names: Vec<PresetName> = PresetName::NCDF.to_vec();
    names.push(PresetName::Rotation(0.1));
    for name in names {
        let p = preset(name)?;
        let d = p.matrix;
        println!(
            "{:<14} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>10.4} {:>10.4} {:>9.4}",
            name.to_string(),
            d.d11,
            d.d12,
            d.d21,
            d.d22,
            p.ellipticity,
            eigen_discriminant(&d),
            generic_stable_dt(&d, 1.0)
        );
        if let Some(w) = p.warning {
            println!("  note: {w}");
        }
    }
    Ok(())
}
