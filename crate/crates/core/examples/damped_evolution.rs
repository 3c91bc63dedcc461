//! Damped dynamics of a displaced Gaussian: exact flow, grid integration and
//! the naive equation that loses reality.

use starkit::dynamics::{damped_rhs, evolve_classical, naive_rhs, reality_defect};
use starkit::numerics::{grid_distance, rk4_evolve, sample, GridRhs};
use starkit::symbols::GridSpec;
use starkit::{parse, Params};

fn main() -> starkit::Result<()> {
    let params = Params::default().with_gamma(0.1);
    let rho0 = parse("2*exp(-(q - 1)^2 - p^2)")?;

    println!("damped generator defect: {:.1e}", reality_defect(&damped_rhs(&rho0, &params)?)?);
    println!("naive generator defect:  {:.1e}", reality_defect(&naive_rhs(&rho0, &params)?)?);

    let spec = GridSpec::new(-6.0, 6.0, -6.0, 6.0, 121, 121)?;
    let t = 1.0;
    let exact = sample(&evolve_classical(&rho0, t, &params), &spec)?;
    let grid0 = sample(&rho0, &spec)?;
    let rk4 = rk4_evolve(&grid0, GridRhs::Damped, t, 2e-3, &params)?;
    println!("t={t}: |rk4 - exact| = {:.2e}", grid_distance(&rk4, &exact)?);
    println!("peak moved to {:?}", exact.argmax());

    let naive = rk4_evolve(&grid0, GridRhs::Naive, t, 2e-3, &params)?;
    println!("naive equation: max |Im rho| = {:.3e}", naive.imaginary_sup());
    Ok(())
}
