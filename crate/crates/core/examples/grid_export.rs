//! Sample a symbol on a grid and round-trip it through CSV and JSON.

use starkit::numerics::{export, grid_distance, import, sample, Format};
use starkit::oscillator::sho_wigner_eigenstate;
use starkit::symbols::GridSpec;
use starkit::Params;

fn main() -> starkit::Result<()> {
    let rho = sho_wigner_eigenstate(3, &Params::default());
    let grid = sample(&rho, &GridSpec::square(4.0, 41))?;
    let dir = std::env::temp_dir();
    for (format, name) in [(Format::Csv, "wigner3.csv"), (Format::Json, "wigner3.json")] {
        let path = dir.join(name);
        export(&grid, format, &path)?;
        let back = import(&path, format)?;
        println!("{}: round-trip distance {:e}", path.display(), grid_distance(&grid, &back)?);
    }
    Ok(())
}
