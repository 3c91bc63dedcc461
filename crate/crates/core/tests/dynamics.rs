use num_complex::Complex64 as C64;
use starkit::dynamics::{evolve_classical, evolve_eigenexpansion, project_onto_offdiagonals, ExpansionCoeffs};
use starkit::symbols::{approx_equal, verification_lattice};
use starkit::{parse, Params};

// Displaced ground state centred at (q0, p0) = √2 (Re α, Im α).
fn coherent_wigner(alpha: C64) -> starkit::Symbol {
    let (q0, p0) = (2f64.sqrt() * alpha.re, 2f64.sqrt() * alpha.im);
    parse(&format!("2*exp(-(q - ({q0}))^2 - (p - ({p0}))^2)")).unwrap()
}

// Triangle n + n' <= max_sum; the degree guard caps the total at 12.
fn support(max_sum: usize) -> Vec<(usize, usize)> {
    (0..=max_sum).flat_map(|n| (0..=max_sum - n).map(move |m| (n, m))).collect()
}

#[test]
fn coherent_projection_matches_closed_form_amplitudes() {
    let params = Params::default();
    let alpha = C64::new(0.3, 0.25);
    let projected = project_onto_offdiagonals(&coherent_wigner(alpha), &support(6), 6.0, 64, &params).unwrap();
    let analytic = ExpansionCoeffs::coherent(alpha, 8);
    for (key, r) in &projected.entries {
        let want = analytic.entries[key];
        assert!((r - want).norm() < 1e-6, "{key:?}: {r} vs {want}");
    }
}

#[test]
fn coherent_expansion_follows_the_classical_flow() {
    let params = Params::default();
    let alpha = C64::new(0.3, 0.25);
    let rho0 = coherent_wigner(alpha);
    let coeffs = project_onto_offdiagonals(&rho0, &support(12), 6.0, 80, &params).unwrap();
    assert!(coeffs.hermiticity_defect() < 1e-8);

    let t = 0.9;
    let quantum = evolve_eigenexpansion(&coeffs, t, &params).unwrap();
    let classical = evolve_classical(&rho0, t, &params);
    let worst = verification_lattice()
        .map(|(p, q)| (quantum.evaluate(p, q).unwrap() - classical.evaluate(p, q).unwrap()).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "sup error {worst:e}");
}

#[test]
fn stationary_state_is_fixed_by_every_evolution() {
    let params = Params::default();
    let rho = starkit::oscillator::sho_wigner_eigenstate(0, &params);
    let mut coeffs = ExpansionCoeffs::new();
    coeffs.insert(0, 0, C64::new(1.0, 0.0));
    for t in [0.3, 1.7, 4.0] {
        assert!(approx_equal(&rho, &evolve_classical(&rho, t, &params), 1e-12).unwrap().equal);
        assert!(approx_equal(&rho, &evolve_eigenexpansion(&coeffs, t, &params).unwrap(), 1e-12).unwrap().equal);
    }
}
