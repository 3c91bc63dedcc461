//! Closed-form objects of the harmonic oscillator and its damped deformation.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::star::{star_product, BilinearStar};
use crate::symbols::{approx_equal, QuadExponent, Symbol};
use crate::transition::DerivOperator;
use crate::Params;

/// Largest `n + n'` accepted by the ladder construction.
pub const DEGREE_GUARD: usize = 12;

const SINGULAR_TIME: f64 = 1e-8;

/// `E_{γ,n} = (ħ/2)[(2n+1)ω + iγ]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampedEigenvalue {
    pub n: usize,
    pub value: C64,
}

impl DampedEigenvalue {
    pub fn new(n: usize, params: &Params) -> Self {
        let value = C64::new(params.hbar * params.omega * (n as f64 + 0.5), 0.5 * params.hbar * params.gamma);
        DampedEigenvalue { n, value }
    }
}

/// `E_n = ħω(n + ½)`.
pub fn energy(n: usize, params: &Params) -> f64 {
    params.hbar * params.omega * (n as f64 + 0.5)
}

/// `p²/2m + mω²q²/2`.
pub fn hamiltonian(params: &Params) -> Symbol {
    Symbol::monomial(0.5 / params.m, 2, 0) + Symbol::monomial(0.5 * params.m * params.omega * params.omega, 0, 2)
}

/// Coefficients of `L_n(x)` in ascending powers.
pub fn laguerre_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![1.0, -1.0];
    for k in 1..n {
        // (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}
        let mut next = vec![0.0; k + 2];
        for (j, c) in cur.iter().enumerate() {
            next[j] += (2 * k + 1) as f64 * c;
            next[j + 1] -= c;
        }
        for (j, c) in prev.iter().enumerate() {
            next[j] -= k as f64 * c;
        }
        for c in next.iter_mut() {
            *c /= (k + 1) as f64;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_n(x)` by the three-term recurrence.
pub fn laguerre(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 1.0 - x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let next = ((2 * k + 1) as f64 - x) * b / (k + 1) as f64 - k as f64 * a / (k + 1) as f64;
        a = b;
        b = next;
    }
    b
}

fn ground_exponent(params: &Params) -> QuadExponent {
    QuadExponent {
        app: C64::new(-1.0 / (params.m * params.hbar * params.omega), 0.0),
        aqq: C64::new(-params.m * params.omega / params.hbar, 0.0),
        ..QuadExponent::ZERO
    }
}

/// `ρ_{E_n} = 2(−1)ⁿ Lₙ(4H/ħω) e^{−2H/ħω}` expanded in the symbol class.
pub fn sho_wigner_eigenstate(n: usize, params: &Params) -> Symbol {
    let x = hamiltonian(params).scale(4.0 / (params.hbar * params.omega));
    let mut poly = Symbol::zero();
    let mut power = Symbol::one();
    for (k, c) in laguerre_coefficients(n).into_iter().enumerate() {
        if k > 0 {
            power = &power * &x;
        }
        poly = &poly + &power.scale(c);
    }
    let sign = if n.is_multiple_of(2) { 2.0 } else { -2.0 };
    &poly.scale(sign) * &Symbol::gaussian(1.0, ground_exponent(params))
}

/// Pointwise value of `ρ_{E_n}`, stable for large `n`.
pub fn sho_wigner_value(n: usize, p: f64, q: f64, params: &Params) -> f64 {
    let h = p * p / (2.0 * params.m) + 0.5 * params.m * params.omega * params.omega * q * q;
    let x = h / (params.hbar * params.omega);
    let sign = if n.is_multiple_of(2) { 2.0 } else { -2.0 };
    sign * laguerre(n, 4.0 * x) * (-2.0 * x).exp()
}

/// `a = (mωq + ip)/√(2mħω)` and its conjugate.
pub fn ladder_symbols(params: &Params) -> (Symbol, Symbol) {
    let norm = 1.0 / (2.0 * params.m * params.hbar * params.omega).sqrt();
    let a = Symbol::monomial(params.m * params.omega * norm, 0, 1) + Symbol::monomial(C64::new(0.0, norm), 1, 0);
    let abar = a.conjugate();
    (a, abar)
}

/// `abar^{⋆n} ⋆ ρ_{E_0} ⋆ a^{⋆n'} / √(n! n'!)`, which equals `ρ_{E_n}` on the diagonal.
pub fn sho_offdiagonal(n: usize, n2: usize, params: &Params) -> Result<Symbol> {
    if n + n2 > DEGREE_GUARD {
        return Err(Error::DegreeGuard(n + n2));
    }
    let star = BilinearStar::moyal(*params);
    let (a, abar) = ladder_symbols(params);
    let mut rho = sho_wigner_eigenstate(0, params);
    for _ in 0..n {
        rho = star_product(&abar, &rho, &star)?;
    }
    for _ in 0..n2 {
        rho = star_product(&rho, &a, &star)?;
    }
    let norm: f64 = (1..=n).chain(1..=n2).map(|k| k as f64).product();
    Ok(rho.scale(1.0 / norm.sqrt()))
}

fn check_time(cos_half: C64, t: C64) -> Result<()> {
    if cos_half.norm() < SINGULAR_TIME {
        return Err(Error::SingularTime(t.re));
    }
    Ok(())
}

/// `sec(ωt/2) exp(2H tan(ωt/2)/(iħω))` for complex `t`.
pub fn undamped_propagator_complex(t: C64, params: &Params) -> Result<Symbol> {
    let half = t * (0.5 * params.omega);
    check_time(half.cos(), t)?;
    let tau = half.tan();
    // 2τ/(iħω) · H
    let k = tau * C64::new(0.0, -2.0 / (params.hbar * params.omega));
    let expo = QuadExponent {
        app: k * (0.5 / params.m),
        aqq: k * (0.5 * params.m * params.omega * params.omega),
        ..QuadExponent::ZERO
    };
    Ok(Symbol::gaussian(half.cos().inv(), expo))
}

pub fn undamped_propagator(t: f64, params: &Params) -> Result<Symbol> {
    undamped_propagator_complex(C64::new(t, 0.0), params)
}

/// Propagator of the damped product.
///
/// `e^{γt/2} / (cos(ωt/2) √κ) · exp(2τ/(iħω) (p²/(2mκ) + mω²q²/2))` with
/// `τ = tan(ωt/2)`, `κ = 1 + 2γτ/ω`; this equals `e^{γt/2} T_γ U(t)`.
pub fn damped_propagator(t: f64, params: &Params) -> Result<Symbol> {
    let half = 0.5 * params.omega * t;
    if half.cos().abs() < SINGULAR_TIME {
        return Err(Error::SingularTime(t));
    }
    let tau = half.tan();
    let kappa = 1.0 + 2.0 * params.gamma * tau / params.omega;
    if kappa.abs() < SINGULAR_TIME {
        return Err(Error::SingularTime(t));
    }
    let k = C64::new(0.0, -2.0 * tau / (params.hbar * params.omega));
    let expo = QuadExponent {
        app: k * (0.5 / (params.m * kappa)),
        aqq: k * (0.5 * params.m * params.omega * params.omega),
        ..QuadExponent::ZERO
    };
    let prefactor = (0.5 * params.gamma * t).exp() / (half.cos() * C64::new(kappa, 0.0).sqrt());
    Ok(Symbol::gaussian(prefactor, expo))
}

/// `T_γ ρ_{E_n}` with its eigenvalue under left multiplication by `H ⋆_γ`.
pub fn damped_eigenstate(n: usize, params: &Params) -> Result<(Symbol, DampedEigenvalue)> {
    let rho = DerivOperator::damped(params.gamma, *params).apply(&sho_wigner_eigenstate(n, params))?;
    Ok((rho, DampedEigenvalue::new(n, params)))
}

/// Closed form of the damped ground state,
/// `2/√(1−2iγ/ω) · exp(−(2/ħω)(p²/(2m(1−2iγ/ω)) + mω²q²/2))`.
pub fn damped_ground_state(params: &Params) -> Symbol {
    let d = C64::new(1.0, -2.0 * params.gamma / params.omega);
    let s = 2.0 / (params.hbar * params.omega);
    let expo = QuadExponent {
        app: -s / (2.0 * params.m * d),
        aqq: C64::new(-s * 0.5 * params.m * params.omega * params.omega, 0.0),
        ..QuadExponent::ZERO
    };
    Symbol::gaussian(2.0 / d.sqrt(), expo)
}

/// Image of an off-diagonal element together with its eigen-equation residuals.
#[derive(Clone, Debug)]
pub struct DampedCandidate {
    pub symbol: Symbol,
    /// `E_{n'} + iħγ/2`, the eigenvalue of `ρ ⋆_γ H`.
    pub right_eigenvalue: C64,
    pub right_residual: f64,
    /// `conj(E_n + iħγ/2)`, the value tested for `H ⋆_{−γ} ρ`.
    pub left_eigenvalue: C64,
    pub left_residual: f64,
}

pub fn damped_offdiagonal_candidate(n: usize, n2: usize, params: &Params) -> Result<DampedCandidate> {
    let g = params.gamma;
    let rho = DerivOperator::damped(g, *params).apply(&sho_offdiagonal(n, n2, params)?)?;
    let h = hamiltonian(params);
    let right_eigenvalue = DampedEigenvalue::new(n2, params).value;
    let right = star_product(&rho, &h, &BilinearStar::damped(g, *params))?;
    let right_residual = approx_equal(&right, &rho.scale(right_eigenvalue), 1.0)?.relative();
    let left_eigenvalue = DampedEigenvalue::new(n, params).value.conj();
    let left = star_product(&h, &rho, &BilinearStar::damped(-g, *params))?;
    let left_residual = approx_equal(&left, &rho.scale(left_eigenvalue), 1.0)?.relative();
    Ok(DampedCandidate { symbol: rho, right_eigenvalue, right_residual, left_eigenvalue, left_residual })
}

/// Truncated eigen-expansion `Σ_{n ≤ N} ρ_{E_n}(p, q) e^{−iE_n t/ħ}` of the propagator.
pub fn spectral_sum(t: C64, n_max: usize, p: f64, q: f64, params: &Params) -> C64 {
    (0..=n_max)
        .map(|n| {
            let phase = (C64::new(0.0, -energy(n, params) / params.hbar) * t).exp();
            phase * sho_wigner_value(n, p, q, params)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Symbol, b: &Symbol, tol: f64) -> bool {
        let c = approx_equal(a, b, tol).unwrap();
        if !c.equal {
            eprintln!("residual {:e} scale {:e}", c.residual, c.scale);
        }
        c.equal
    }

    #[test]
    fn laguerre_low_orders() {
        assert_eq!(laguerre_coefficients(0), vec![1.0]);
        assert_eq!(laguerre_coefficients(1), vec![1.0, -1.0]);
        assert_eq!(laguerre_coefficients(2), vec![1.0, -2.0, 0.5]);
        for n in 0..12 {
            let x = 0.37 * n as f64;
            let poly: f64 = laguerre_coefficients(n).iter().rev().fold(0.0, |acc, c| acc * x + c);
            assert!((poly - laguerre(n, x)).abs() < 1e-11);
        }
    }

    #[test]
    fn eigenstate_values() {
        let p = Params::default();
        assert!((sho_wigner_eigenstate(0, &p).evaluate(0.0, 0.0).unwrap() - 2.0).norm() < 1e-15);
        assert!((sho_wigner_eigenstate(1, &p).evaluate(0.0, 0.0).unwrap() + 2.0).norm() < 1e-15);
        assert!((hamiltonian(&p).evaluate(1.0, 1.0).unwrap() - 1.0).norm() < 1e-15);
        let p = Params::new(1.3, 0.8, 0.9, 0.0).unwrap();
        for n in 0..8 {
            let s = sho_wigner_eigenstate(n, &p);
            let v = s.evaluate(0.7, -0.4).unwrap();
            assert!((v.re - sho_wigner_value(n, 0.7, -0.4, &p)).abs() < 1e-11 && v.im == 0.0);
        }
    }

    #[test]
    fn diagonal_eigen_equations() {
        let p = Params::new(1.2, 0.9, 0.8, 0.0).unwrap();
        let star = BilinearStar::moyal(p);
        let h = hamiltonian(&p);
        for n in 0..=8 {
            let rho = sho_wigner_eigenstate(n, &p);
            let want = rho.scale(energy(n, &p));
            assert!(close(&star_product(&h, &rho, &star).unwrap(), &want, 1e-9), "n = {n}");
            assert!(close(&star_product(&rho, &h, &star).unwrap(), &want, 1e-9), "n = {n}");
        }
    }

    #[test]
    fn ladder_algebra() {
        let p = Params::new(0.7, 1.4, 1.1, 0.0).unwrap();
        let star = BilinearStar::moyal(p);
        let (a, abar) = ladder_symbols(&p);
        let comm = crate::star::star_commutator(&a, &abar, &star).unwrap();
        assert!(close(&comm, &Symbol::one(), 1e-14));
        let rho0 = sho_wigner_eigenstate(0, &p);
        assert!(star_product(&a, &rho0, &star).unwrap().sup_norm().unwrap() < 1e-12);
        // Pointwise H = ħω abar a; the star form carries the extra ½.
        let hw = p.hbar * p.omega;
        assert!(close(&hamiltonian(&p), &(&abar * &a).scale(hw), 1e-14));
        let star_form = star_product(&abar, &a, &star).unwrap() + Symbol::constant(0.5);
        assert!(close(&hamiltonian(&p), &star_form.scale(hw), 1e-14));
    }

    #[test]
    fn offdiagonal_eigen_equations() {
        let p = Params::default();
        let star = BilinearStar::moyal(p);
        let h = hamiltonian(&p);
        assert!(close(&sho_offdiagonal(0, 0, &p).unwrap(), &sho_wigner_eigenstate(0, &p), 1e-15));
        for (n, n2) in [(1, 0), (0, 1), (2, 3), (5, 1), (6, 6)] {
            let rho = sho_offdiagonal(n, n2, &p).unwrap();
            assert!(close(&star_product(&h, &rho, &star).unwrap(), &rho.scale(energy(n, &p)), 1e-9));
            assert!(close(&star_product(&rho, &h, &star).unwrap(), &rho.scale(energy(n2, &p)), 1e-9));
        }
        for n in 1..=4 {
            let d = sho_offdiagonal(n, n, &p).unwrap();
            assert!(close(&d, &sho_wigner_eigenstate(n, &p), 1e-11), "n = {n}");
        }
        assert!(matches!(sho_offdiagonal(7, 6, &p), Err(Error::DegreeGuard(13))));
    }

    #[test]
    fn propagator_basics() {
        let p = Params::default();
        assert_eq!(undamped_propagator(0.0, &p).unwrap(), Symbol::one());
        let u = undamped_propagator(0.3, &p).unwrap();
        assert!(close(&u.conjugate(), &undamped_propagator(-0.3, &p).unwrap(), 1e-12));
        assert!(matches!(undamped_propagator(std::f64::consts::PI, &p), Err(Error::SingularTime(_))));
        let pd = p.with_gamma(0.1);
        assert!(close(&damped_propagator(0.0, &pd).unwrap(), &Symbol::one(), 1e-15));
        assert!(close(&damped_propagator(0.4, &p).unwrap(), &undamped_propagator(0.4, &p).unwrap(), 1e-14));
    }

    #[test]
    fn damped_propagator_is_transformed_undamped() {
        let p = Params::new(1.0, 1.0, 1.0, 0.1).unwrap();
        for &t in &[0.1, 0.5, 2.5] {
            let u = undamped_propagator(t, &p).unwrap();
            let tu = DerivOperator::damped(p.gamma, p).apply(&u).unwrap().scale((0.5 * p.gamma * t).exp());
            assert!(close(&damped_propagator(t, &p).unwrap(), &tu, 1e-12), "t = {t}");
        }
    }

    #[test]
    fn group_property() {
        let p = Params::default();
        let star = BilinearStar::moyal(p);
        let a = undamped_propagator(0.4, &p).unwrap();
        let b = undamped_propagator(0.9, &p).unwrap();
        let ab = star_product(&a, &b, &star).unwrap();
        assert!(close(&ab, &undamped_propagator(1.3, &p).unwrap(), 1e-12));
    }

    #[test]
    fn damped_ground_state_matches_closed_form() {
        let p = Params::new(1.0, 1.0, 1.0, 0.1).unwrap();
        let (rho, e) = damped_eigenstate(0, &p).unwrap();
        assert!(close(&rho, &damped_ground_state(&p), 1e-13));
        assert!((e.value - C64::new(0.5, 0.05)).norm() < 1e-15);
        let im = rho.evaluate(1.0, 0.0).unwrap().im.abs();
        assert!(im > 1e-3);
    }

    #[test]
    fn damped_eigen_equations() {
        for &g in &[0.05, 0.1, 0.3] {
            let p = Params::new(1.0, 1.0, 1.0, g).unwrap();
            let h = hamiltonian(&p);
            let star = BilinearStar::damped(g, p);
            for n in 0..=8 {
                let (rho, e) = damped_eigenstate(n, &p).unwrap();
                let lhs = star_product(&h, &rho, &star).unwrap();
                assert!(close(&lhs, &rho.scale(e.value), 1e-9), "γ = {g}, n = {n}");
            }
        }
    }

    #[test]
    fn offdiagonal_candidates() {
        let p = Params::new(1.0, 1.0, 1.0, 0.1).unwrap();
        let c = damped_offdiagonal_candidate(0, 0, &p).unwrap();
        assert!(c.right_residual < 1e-9);
        assert!(close(&c.symbol, &damped_eigenstate(0, &p).unwrap().0, 1e-14));
        let c = damped_offdiagonal_candidate(1, 0, &p).unwrap();
        assert!(c.right_residual < 1e-9);
        assert!((c.right_eigenvalue - C64::new(0.5, 0.05)).norm() < 1e-15);
        assert!(c.left_residual.is_finite());
    }
}
