//! Closed-form star exponentials exp⋆(-iHt/ħ) of the oscillator Hamiltonian.

use starkit::oscillator::{damped_propagator, undamped_propagator};
use starkit::Params;

fn main() -> starkit::Result<()> {
    let params = Params::default();
    for t in [0.0, 0.5, 1.0, 2.0] {
        let u = undamped_propagator(t, &params)?;
        println!("t={t}: U(0,0) = {:.6}", u.evaluate(0.0, 0.0)?);
    }
    // The undamped propagator blows up where cos(ωt/2) vanishes.
    match undamped_propagator(std::f64::consts::PI, &params) {
        Ok(_) => println!("t=pi evaluated"),
        Err(e) => println!("t=pi: {e}"),
    }

    let damped = params.with_gamma(0.1);
    for t in [0.5, 1.0, 2.0] {
        let u = damped_propagator(t, &damped)?;
        println!("gamma=0.1 t={t}: U(0,0) = {:.6}", u.evaluate(0.0, 0.0)?);
    }
    println!("U(1) = {}", damped_propagator(1.0, &damped)?);
    Ok(())
}
