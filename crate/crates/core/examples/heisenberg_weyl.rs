//! Heisenberg–Weyl generators as eigenvectors of the adjoint action.

use starkit::star::{hw_eigenvalue, hw_phase};
use starkit::Params;

fn main() -> starkit::Result<()> {
    let params = Params::default();
    let (a, b, c, d) = (0.3, -0.7, 0.5, 0.2);
    for gamma in [0.0, 0.1, 0.5] {
        let lambda = hw_eigenvalue(a, b, c, d, gamma, &params)?;
        let phase = hw_phase(a, b, c, d, gamma, &params)?;
        println!("gamma={gamma}: eigenvalue {lambda:.6}, phase {phase:.6}");
    }
    Ok(())
}
