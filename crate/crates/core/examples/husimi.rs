//! Husimi distributions of oscillator eigenstates are non-negative.

use starkit::numerics::sample;
use starkit::oscillator::sho_wigner_eigenstate;
use starkit::symbols::GridSpec;
use starkit::transition::husimi_distribution;
use starkit::Params;

fn main() -> starkit::Result<()> {
    let params = Params::default();
    let spec = GridSpec::square(5.0, 81);
    for n in 0..4 {
        let w = sample(&sho_wigner_eigenstate(n, &params), &spec)?;
        let h = sample(&husimi_distribution(&sho_wigner_eigenstate(n, &params), 1.0, &params)?, &spec)?;
        let min = |g: &starkit::numerics::PhaseGrid| g.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        println!("n={n}: min Wigner {:+.4}, min Husimi {:+.2e}", min(&w), min(&h));
    }
    println!("Q_0 = {}", husimi_distribution(&sho_wigner_eigenstate(0, &params), 1.0, &params)?);
    Ok(())
}
