//! Property suites checking the engine's identities with pinned tolerances.
//!
//! Each suite returns a list of [`Check`]s; a suite passes when all of its
//! checks do. The same suites back the `verify` subcommand and the
//! acceptance test target.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{damped_rhs, evolve_classical, moyal_rhs, naive_rhs, reality_defect};
use crate::error::Result;
use crate::numerics::{gauss_legendre_2d, grid_distance, rk4_evolve, sample, GridRhs};
use crate::oscillator::{
    damped_eigenstate, damped_ground_state, damped_propagator, energy, hamiltonian, sho_wigner_eigenstate,
    spectral_sum, undamped_propagator, undamped_propagator_complex,
};
use crate::star::{bracket, damped_ad, hw_phase, star_exp_truncated, star_product, BilinearStar};
use crate::symbols::{approx_equal, verification_lattice, GridSpec, QuadExponent, Symbol, Term, Var};
use crate::transition::{check_equivalence, husimi_distribution, DerivOperator};
use crate::Params;

/// Direction of a pass condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub tol: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check { name: name.into(), value, bound: Bound::AtMost, tol }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check { name: name.into(), value, bound: Bound::AtLeast, tol }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.tol,
            Bound::AtLeast => self.value > self.tol,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (rel, status) = match (self.bound, self.passed()) {
            (Bound::AtMost, true) => ("<=", "ok"),
            (Bound::AtMost, false) => (">", "FAILED"),
            (Bound::AtLeast, true) => (">", "ok"),
            (Bound::AtLeast, false) => ("<=", "FAILED"),
        };
        write!(f, "{:<6} {}: {:.3e} {} {:.0e}", status, self.name, self.value, rel, self.tol)
    }
}

/// A named group of checks.
#[derive(Clone, Debug)]
pub struct Suite {
    pub id: usize,
    pub name: &'static str,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl Suite {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// The failing check with the largest violation, if any.
    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().filter(|c| !c.passed()).max_by(|a, b| {
            let ra = a.value / a.tol;
            let rb = b.value / b.tol;
            ra.total_cmp(&rb)
        })
    }
}

type Runner = fn() -> Result<Vec<Check>>;

/// `(name, title, runner)` for every suite, in criterion order.
pub const SUITES: [(&str, &str, Runner); 12] = [
    ("brackets", "damped brackets reproduce the equations of motion", brackets),
    ("equivalence", "transition operators intertwine star products", equivalence),
    ("complexification", "T(H) = H - i hbar gamma / 2", complexification),
    ("spectrum", "undamped Wigner eigenfunctions", spectrum),
    ("damped-spectrum", "damped eigenfunctions and eigenvalues", damped_spectrum),
    ("propagators", "propagator identities and dynamics", propagators),
    ("reality", "naive equation breaks reality, corrected one keeps it", reality),
    ("classical-limit", "damped evolution equals classical Liouville flow", classical_limit),
    ("flow", "classical flow solves the evolution equation", flow),
    ("heisenberg-weyl", "deformed Heisenberg-Weyl phase", heisenberg_weyl),
    ("spectral", "eigen-expansion of the propagator", spectral),
    ("husimi", "Husimi image equals Gaussian smoothing", husimi),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

/// Runs suite `id` (1-based).
pub fn run(id: usize) -> Suite {
    let (name, title, runner) = SUITES[id - 1];
    let start = Instant::now();
    let checks = runner().unwrap_or_else(|e| vec![Check::at_most(format!("error: {e}"), f64::INFINITY, 0.0)]);
    Suite { id, name, title, checks, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_named(name: &str) -> Option<Suite> {
    SUITES.iter().position(|s| s.0 == name).map(|i| run(i + 1))
}

fn rel(a: &Symbol, b: &Symbol) -> Result<f64> {
    Ok(approx_equal(a, b, 1.0)?.relative())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_c64(r: &mut ChaCha8Rng) -> C64 {
    C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

/// Random polynomial of total degree at most `degree`.
pub fn random_polynomial(r: &mut ChaCha8Rng, degree: u32) -> Symbol {
    let mut terms = Vec::new();
    for a in 0..=degree {
        for b in 0..=(degree - a) {
            if r.gen_bool(0.6) {
                terms.push(Term::monomial(random_c64(r), a, b));
            }
        }
    }
    Symbol::from_terms(terms)
}

/// Random symbol mixing a polynomial and polynomial-prefactor Gaussians.
pub fn random_symbol(r: &mut ChaCha8Rng) -> Symbol {
    let mut out = random_polynomial(r, 3);
    for _ in 0..r.gen_range(1..=2) {
        let expo = QuadExponent {
            app: C64::new(-r.gen_range(0.2..1.0), r.gen_range(-0.3..0.3)),
            aqq: C64::new(-r.gen_range(0.2..1.0), r.gen_range(-0.3..0.3)),
            apq: C64::new(r.gen_range(-0.2..0.2), r.gen_range(-0.2..0.2)),
            bp: random_c64(r) * 0.5,
            bq: random_c64(r) * 0.5,
        };
        let prefactor = random_polynomial(r, 2);
        out = &out + &(&prefactor * &Symbol::gaussian(1.0, expo));
    }
    out
}

/// Random real symbol: polynomial with real coefficients plus real Gaussians.
pub fn random_real_symbol(r: &mut ChaCha8Rng) -> Symbol {
    random_symbol(r).real_part()
}

fn worst(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

fn brackets() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for &(m, w, g) in &[(1.0, 1.0, 0.1), (2.0, 0.7, 0.3), (0.5, 1.5, 0.0)] {
        let p = Params::new(m, w, 1.0, g)?;
        let h = hamiltonian(&p);
        let qdot = rel(&bracket(&Symbol::q(), &h, g, &p), &Symbol::monomial(1.0 / m, 1, 0))?;
        let pdot_want = Symbol::monomial(-m * w * w, 0, 1) + Symbol::monomial(-2.0 * g, 1, 0);
        let pdot = rel(&bracket(&Symbol::p(), &h, g, &p), &pdot_want)?;
        checks.push(Check::at_most(format!("{{q,H}} = p/m (m={m}, omega={w}, gamma={g})"), qdot, 1e-14));
        checks.push(Check::at_most(format!("{{p,H}} = -m omega^2 q - 2 gamma p (m={m}, omega={w}, gamma={g})"), pdot, 1e-14));
    }
    Ok(checks)
}

fn equivalence() -> Result<Vec<Check>> {
    let p = Params::default();
    let mut r = rng(2);
    let cases = [
        ("T_damped(0.1) to damped product", BilinearStar::damped(0.1, p), DerivOperator::damped(0.1, p)),
        ("T_standard with standard product", BilinearStar::standard(p), DerivOperator::standard(p)),
        ("T_husimi(1) to Husimi product", BilinearStar::husimi(1.0, p), DerivOperator::husimi(1.0, p)),
    ];
    let mut checks = vec![Check::at_most(
        "q, p under T_damped(0.1)",
        check_equivalence(&Symbol::q(), &Symbol::p(), &cases[0].1, &cases[0].2)?,
        1e-12,
    )];
    for (name, star, op) in cases {
        let v = worst((0..100).map(|_| {
            let f = random_polynomial(&mut r, 4);
            let g = random_polynomial(&mut r, 4);
            check_equivalence(&f, &g, &star, &op)
        }))?;
        checks.push(Check::at_most(format!("{name}, 100 random degree-4 pairs"), v, 1e-10));
    }
    Ok(checks)
}

fn complexification() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for &g in &[0.05, 0.1, 0.3] {
        let p = Params::new(1.0, 1.0, 1.0, g)?;
        let h = hamiltonian(&p);
        let t = DerivOperator::damped(g, p).apply(&h)?;
        let want = &h - &Symbol::constant(C64::new(0.0, 0.5 * p.hbar * g));
        checks.push(Check::at_most(format!("T(H) = H - i hbar gamma/2 (gamma={g})"), rel(&t, &want)?, 1e-14));
        let back = DerivOperator::damped(g, p).inverse().apply(&t)?;
        checks.push(Check::at_most(format!("inverse round trip (gamma={g})"), rel(&back, &h)?, 1e-14));
    }
    Ok(checks)
}

fn spectrum() -> Result<Vec<Check>> {
    let p = Params::default();
    let star = BilinearStar::moyal(p);
    let h = hamiltonian(&p);
    let mut checks = Vec::new();
    for n in 0..=8 {
        let rho = sho_wigner_eigenstate(n, &p);
        let want = rho.scale(energy(n, &p));
        let left = rel(&star_product(&h, &rho, &star)?, &want)?;
        let right = rel(&star_product(&rho, &h, &star)?, &want)?;
        checks.push(Check::at_most(format!("H * rho_{n} = E_{n} rho_{n}"), left, 1e-9));
        checks.push(Check::at_most(format!("rho_{n} * H = E_{n} rho_{n}"), right, 1e-9));
    }
    Ok(checks)
}

fn damped_spectrum() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for &g in &[0.05, 0.1, 0.3] {
        let p = Params::new(1.0, 1.0, 1.0, g)?;
        let h = hamiltonian(&p);
        let star = BilinearStar::damped(g, p);
        let v = worst((0..=8).map(|n| {
            let (rho, e) = damped_eigenstate(n, &p)?;
            rel(&star_product(&h, &rho, &star)?, &rho.scale(e.value))
        }))?;
        checks.push(Check::at_most(format!("H *_gamma T(rho_n) = E_gamma,n T(rho_n), n <= 8 (gamma={g})"), v, 1e-9));
    }
    let p = Params::new(1.0, 1.0, 1.0, 0.1)?;
    let (rho, _) = damped_eigenstate(0, &p)?;
    let closed = damped_ground_state(&p);
    checks.push(Check::at_most("n = 0 against closed form on the lattice", rel(&rho, &closed)?, 1e-10));
    let at = (rho.evaluate(1.0, 1.0)? - closed.evaluate(1.0, 1.0)?).norm();
    checks.push(Check::at_most("n = 0 against closed form at (1, 1)", at, 1e-10));
    Ok(checks)
}

/// Richardson-extrapolated central difference in `t`.
fn time_derivative(f: impl Fn(f64) -> Result<Symbol>, t: f64, h: f64) -> Result<Symbol> {
    let d = |h: f64| -> Result<Symbol> { Ok((f(t + h)? - f(t - h)?).scale(0.5 / h)) };
    let (coarse, fine) = (d(h)?, d(0.5 * h)?);
    Ok((fine.scale(4.0) - coarse).scale(1.0 / 3.0))
}

fn propagators() -> Result<Vec<Check>> {
    let p = Params::new(1.0, 1.0, 1.0, 0.1)?;
    let p0 = p.with_gamma(0.0);
    let mut checks = Vec::new();
    for &t in &[0.1, 0.5] {
        let tu = DerivOperator::damped(p.gamma, p).apply(&undamped_propagator(t, &p)?)?.scale((0.5 * p.gamma * t).exp());
        let v = rel(&damped_propagator(t, &p)?, &tu)?;
        checks.push(Check::at_most(format!("U_gamma(t) = e^(gamma t/2) T U(t), t={t}"), v, 1e-9));
    }
    let ih = C64::new(0.0, p.hbar);
    let t = 0.4;
    let h = hamiltonian(&p);
    let du = time_derivative(|s| undamped_propagator(s, &p0), t, 1e-5)?.scale(ih);
    let hu = star_product(&h, &undamped_propagator(t, &p0)?, &BilinearStar::moyal(p0))?;
    checks.push(Check::at_most("i hbar dU/dt = H * U at t=0.4", rel(&du, &hu)?, 1e-7));
    let dug = time_derivative(|s| damped_propagator(s, &p), t, 1e-5)?.scale(ih);
    let hug = star_product(&h, &damped_propagator(t, &p)?, &BilinearStar::damped(p.gamma, p))?;
    checks.push(Check::at_most("i hbar dU_gamma/dt = H *_gamma U_gamma at t=0.4", rel(&dug, &hug)?, 1e-7));
    let t = 0.1;
    let gen = h.scale(C64::new(0.0, -t / p.hbar));
    let e = star_exp_truncated(&gen, &BilinearStar::moyal(p0), 20)?;
    checks.push(Check::at_most("star exponential = U(0.1)", rel(&e, &undamped_propagator(t, &p0)?)?, 1e-8));
    let eg = star_exp_truncated(&gen, &BilinearStar::damped(p.gamma, p), 20)?;
    checks.push(Check::at_most("damped star exponential = U_gamma(0.1)", rel(&eg, &damped_propagator(t, &p)?)?, 1e-8));
    Ok(checks)
}

fn reality() -> Result<Vec<Check>> {
    let p = Params::new(1.0, 1.0, 1.0, 0.1)?;
    let mut r = rng(7);
    let mut samples = vec![sho_wigner_eigenstate(0, &p), sho_wigner_eigenstate(2, &p)];
    samples.extend((0..10).map(|_| random_symbol(&mut r)));
    let extra = worst(samples.iter().map(|rho| {
        let got = naive_rhs(rho, &p)? - moyal_rhs(rho, &p)?;
        let want = rho.differentiate(Var::P, 1).differentiate(Var::Q, 1).scale(C64::new(0.0, p.gamma * p.hbar));
        rel(&got, &want)
    }))?;
    let rho0 = sho_wigner_eigenstate(0, &p);
    Ok(vec![
        Check::at_most("naive - Moyal = i gamma hbar d_p d_q rho", extra, 1e-12),
        Check::at_least("reality defect of naive rhs (rho_0, gamma=0.1)", reality_defect(&naive_rhs(&rho0, &p)?)?, 1e-3),
        Check::at_most("reality defect of damped rhs (rho_0, gamma=0.1)", reality_defect(&damped_rhs(&rho0, &p)?)?, 1e-12),
    ])
}

fn classical_limit() -> Result<Vec<Check>> {
    let mut r = rng(8);
    let p = Params::new(1.3, 0.9, 0.8, 0.25)?;
    let h = hamiltonian(&p);
    let v = worst((0..50).map(|_| {
        let rho = random_symbol(&mut r);
        let ad = damped_ad(&h, &rho, p.gamma, &p)?.scale(C64::new(0.0, -1.0 / p.hbar));
        let sum = ad + bracket(&rho, &h, p.gamma, &p);
        Ok(sum.sup_norm()? / (1.0 + rho.sup_norm()?))
    }))?;
    Ok(vec![Check::at_most("ad_gamma[H] rho/(i hbar) + {rho,H}_gamma = 0, 50 random symbols", v, 1e-11)])
}

fn flow() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let rho0 = crate::symbols::parse("exp(-(q-1)^2 - p^2) + 0.5*q*p*exp(-q^2 - 2*p^2 + 0.3*p)")?;
    for &(g, label) in &[(0.1, "underdamped"), (1.0, "critical"), (2.0, "overdamped")] {
        let p = Params::new(1.0, 1.0, 1.0, g)?;
        let v = worst([0.0, 0.75, 1.5, 2.25, 3.0].iter().map(|&t| {
            let fd = time_derivative(|s| Ok(evolve_classical(&rho0, s, &p)), t, 1e-4)?;
            let rhs = damped_rhs(&evolve_classical(&rho0, t, &p), &p)?;
            rel(&fd, &rhs)
        }))?;
        checks.push(Check::at_most(format!("d/dt classical flow = damped rhs, t in [0,3] ({label})"), v, 1e-7));
    }
    let p = Params::new(1.0, 1.0, 1.0, 0.1)?;
    let rho0 = crate::symbols::parse("exp(-((q-1)^2 + p^2)/2)")?;
    let spec = GridSpec::large();
    let g0 = sample(&rho0, &spec)?;
    let evolved = rk4_evolve(&g0, GridRhs::Damped, 1.0, 1e-3, &p)?;
    let exact = sample(&evolve_classical(&rho0, 1.0, &p), &spec)?;
    checks.push(Check::at_most("RK4 grid oracle at t=1 (201^2, dt=1e-3)", grid_distance(&evolved, &exact)?, 1e-5));
    Ok(checks)
}

fn heisenberg_weyl() -> Result<Vec<Check>> {
    let mut r = rng(10);
    let p = Params::new(1.0, 1.0, 1.0, 0.0)?;
    let v = worst((0..20).map(|_| {
        let (a, b, c, d) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let g = r.gen_range(0.0..0.5);
        let got = hw_phase(a, b, c, d, g, &p)?;
        let want = C64::new(0.0, -p.hbar * (a * d - b * c + 2.0 * p.m * g * a * c)).exp();
        Ok((got - want).norm())
    }))?;
    Ok(vec![Check::at_most("phase = exp(-i hbar (ad - bc + 2 m gamma ac)), 20 random draws", v, 1e-10)])
}

fn spectral() -> Result<Vec<Check>> {
    let p = Params::default();
    let t = C64::new(0.3, -0.2);
    let start = Instant::now();
    let u = undamped_propagator_complex(t, &p)?.compile();
    let (mut residual, mut scale) = (0.0f64, 0.0f64);
    for (pp, qq) in verification_lattice() {
        let exact = u.evaluate(pp, qq)?;
        residual = residual.max((spectral_sum(t, 60, pp, qq, &p) - exact).norm());
        scale = scale.max(exact.norm());
    }
    Ok(vec![
        Check::at_most("sum_{n<=60} rho_n e^(-i E_n t) = U(t) at t = 0.3 - 0.2i", residual / (1.0 + scale), 1e-6),
        Check::at_most("runtime in seconds", start.elapsed().as_secs_f64(), 30.0),
    ])
}

fn husimi() -> Result<Vec<Check>> {
    let p = Params::default();
    let s = 1.0;
    let rho = sho_wigner_eigenstate(0, &p);
    let image = husimi_distribution(&rho, s, &p)?;
    let plan = rho.compile();
    let rule = gauss_legendre_2d(-9.0, 9.0, 120);
    let weights: Vec<(f64, f64, C64)> = rule.iter().map(|&(pp, qq, w)| Ok((pp, qq, plan.evaluate(pp, qq)? * w))).collect::<Result<_>>()?;
    let (mut residual, mut scale, mut min_re, mut max_im) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    for (pp, qq) in verification_lattice() {
        let quad: C64 = weights
            .iter()
            .map(|&(p1, q1, v)| v * (-((qq - q1).powi(2) / (s * s) + s * s * (pp - p1).powi(2)) / p.hbar).exp())
            .sum::<C64>()
            / (PI * p.hbar);
        let exact = image.evaluate(pp, qq)?;
        residual = residual.max((exact - quad).norm());
        scale = scale.max(exact.norm());
        min_re = min_re.min(exact.re);
        max_im = max_im.max(exact.im.abs());
    }
    Ok(vec![
        Check::at_most("T_H(1) rho_0 against Gaussian-smoothing quadrature", residual / (1.0 + scale), 1e-6),
        Check::at_least("minimum of T_H(1) rho_0 on the lattice", min_re, 0.0),
        Check::at_most("imaginary part of T_H(1) rho_0", max_im, 1e-14),
    ])
}
