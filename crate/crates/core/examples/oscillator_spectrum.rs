//! Wigner eigenfunctions of the oscillator, with and without damping.

use starkit::oscillator::{damped_eigenstate, energy, hamiltonian, sho_wigner_eigenstate};
use starkit::star::{star_product, BilinearStar};
use starkit::symbols::approx_equal;
use starkit::Params;

fn main() -> starkit::Result<()> {
    let params = Params::default();
    let h = hamiltonian(&params);
    let moyal = BilinearStar::moyal(params);
    println!("undamped");
    for n in 0..5 {
        let rho = sho_wigner_eigenstate(n, &params);
        let e = energy(n, &params);
        let res = approx_equal(&star_product(&h, &rho, &moyal)?, &rho.scale(e), 1.0)?.relative();
        println!("  n={n} E={e} residual={res:.1e}");
    }

    let damped = params.with_gamma(0.1);
    let star = BilinearStar::damped(damped.gamma, damped);
    println!("damped, gamma = {}", damped.gamma);
    for n in 0..4 {
        let (rho, e) = damped_eigenstate(n, &damped)?;
        let res = approx_equal(&star_product(&h, &rho, &star)?, &rho.scale(e.value), 1.0)?.relative();
        println!("  n={n} E={:.4} residual={res:.1e}", e.value);
    }
    println!("rho_0 = {}", damped_eigenstate(0, &damped)?.0);
    Ok(())
}
