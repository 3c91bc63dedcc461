//! Partial sums of the eigenfunction expansion of the propagator at complex time.

use num_complex::Complex64 as C64;
use starkit::oscillator::{spectral_sum, undamped_propagator_complex};
use starkit::Params;

fn main() -> starkit::Result<()> {
    let params = Params::default();
    let t = C64::new(0.7, -0.9);
    let exact = undamped_propagator_complex(t, &params)?.evaluate(0.4, -0.3)?;
    for n in [10, 20, 40, 60, 80] {
        let partial = spectral_sum(t, n, 0.4, -0.3, &params);
        println!("N={n:>2}: relative error {:.2e}", (partial - exact).norm() / exact.norm());
    }
    Ok(())
}
