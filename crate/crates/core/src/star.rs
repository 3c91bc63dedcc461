//! Brackets and star products `f ⋆ g = f exp(∂←ᵀ B ∂→) g` over the basis `(q, p)`.
//!
//! A product is evaluated exactly when one side is a pure polynomial (the
//! bidifferential series terminates) or when both sides are pure Gaussian
//! terms (closed form). Anything else is rejected with
//! [`Error::NonTerminating`].

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gaussian::heat_image;
use crate::symbols::{QuadExponent, Symbol, Term, Var};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Which family a [`BilinearStar`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StarKind {
    Moyal,
    /// Signed damping constant.
    Damped(f64),
    Standard,
    /// Husimi product with squeeze parameter `s`.
    Husimi(f64),
    Custom,
}

/// A star product given by the 2×2 matrix `B` over `(∂q, ∂p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilinearStar {
    kind: StarKind,
    matrix: [[C64; 2]; 2],
    params: crate::Params,
}

pub(crate) fn moyal_matrix(hbar: f64) -> [[C64; 2]; 2] {
    let h = C64::new(0.0, 0.5 * hbar);
    [[ZERO, h], [-h, ZERO]]
}

impl BilinearStar {
    pub fn moyal(params: crate::Params) -> Self {
        BilinearStar { kind: StarKind::Moyal, matrix: moyal_matrix(params.hbar), params }
    }

    /// Damped product with the given signed `γ` (the `gamma` in `params` is ignored).
    pub fn damped(gamma: f64, params: crate::Params) -> Self {
        let mut matrix = moyal_matrix(params.hbar);
        matrix[1][1] = C64::new(0.0, -params.hbar * gamma * params.m);
        BilinearStar { kind: StarKind::Damped(gamma), matrix, params }
    }

    pub fn standard(params: crate::Params) -> Self {
        let matrix = [[ZERO, C64::new(0.0, params.hbar)], [ZERO, ZERO]];
        BilinearStar { kind: StarKind::Standard, matrix, params }
    }

    pub fn husimi(s: f64, params: crate::Params) -> Self {
        let mut matrix = moyal_matrix(params.hbar);
        matrix[0][0] = C64::new(0.5 * params.hbar * s * s, 0.0);
        matrix[1][1] = C64::new(0.5 * params.hbar / (s * s), 0.0);
        BilinearStar { kind: StarKind::Husimi(s), matrix, params }
    }

    pub fn from_matrix(matrix: [[C64; 2]; 2], params: crate::Params) -> Self {
        BilinearStar { kind: StarKind::Custom, matrix, params }
    }

    pub fn kind(&self) -> StarKind {
        self.kind
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        self.matrix
    }

    pub fn params(&self) -> crate::Params {
        self.params
    }

    /// The product `⋆'` with `conj(f ⋆ g) = conj(g) ⋆' conj(f)`, i.e. `B' = conj(B)ᵀ`.
    pub fn adjoint(&self) -> BilinearStar {
        let b = self.matrix;
        let matrix = [[b[0][0].conj(), b[1][0].conj()], [b[0][1].conj(), b[1][1].conj()]];
        let kind = match self.kind {
            StarKind::Damped(g) => StarKind::Damped(-g),
            StarKind::Standard => StarKind::Custom,
            k => k,
        };
        BilinearStar { kind, matrix, params: self.params }
    }

    /// Entry-wise distance between the defining matrices.
    pub fn matrix_distance(&self, other: &BilinearStar) -> f64 {
        let (a, b) = (self.matrix, other.matrix);
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (a[i][j] - b[i][j]).norm()))
            .fold(0.0, f64::max)
    }
}

/// Memoized mixed derivatives `∂q^a ∂p^b f`.
pub(crate) struct DerivCache {
    map: HashMap<(u32, u32), Symbol>,
}

impl DerivCache {
    pub(crate) fn new(f: &Symbol) -> Self {
        let mut map = HashMap::new();
        map.insert((0, 0), f.clone());
        DerivCache { map }
    }

    pub(crate) fn get(&mut self, nq: u32, np: u32) -> &Symbol {
        if !self.map.contains_key(&(nq, np)) {
            let d = if np > 0 {
                self.get(nq, np - 1).differentiate(Var::P, 1)
            } else {
                self.get(nq - 1, 0).differentiate(Var::Q, 1)
            };
            self.map.insert((nq, np), d);
        }
        &self.map[&(nq, np)]
    }
}

/// All ways to write `n` as an ordered sum of `parts` non-negative integers.
pub(crate) fn compositions(n: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for k in 0..=n {
        for mut rest in compositions(n - k, parts - 1) {
            rest.insert(0, k);
            out.push(rest);
        }
    }
    out
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Order-`n` term of the bidifferential series, appended as raw terms.
pub(crate) fn series_order(
    left: &mut DerivCache,
    right: &mut DerivCache,
    matrix: &[[C64; 2]; 2],
    n: u32,
    out: &mut Vec<Term>,
) {
    let entries: Vec<(usize, usize, C64)> = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .filter(|&(i, j)| matrix[i][j] != ZERO)
        .map(|(i, j)| (i, j, matrix[i][j]))
        .collect();
    for ks in compositions(n, entries.len()) {
        let mut coef = C64::new(1.0, 0.0);
        let (mut lq, mut lp, mut rq, mut rp) = (0, 0, 0, 0);
        for (&k, &(i, j, b)) in ks.iter().zip(entries.iter()) {
            if k == 0 {
                continue;
            }
            coef *= b.powu(k) / factorial(k);
            if i == 0 { lq += k } else { lp += k }
            if j == 0 { rq += k } else { rp += k }
        }
        let dl = left.get(lq, lp).clone();
        if dl.is_zero() {
            continue;
        }
        let dr = right.get(rq, rp);
        if dr.is_zero() {
            continue;
        }
        for a in dl.terms() {
            for b in dr.terms() {
                out.push(Term::new(
                    coef * a.coeff * b.coeff,
                    a.pow_p + b.pow_p,
                    a.pow_q + b.pow_q,
                    a.expo + b.expo,
                ));
            }
        }
    }
}

fn series(f: &Symbol, g: &Symbol, matrix: &[[C64; 2]; 2], order: u32, out: &mut Vec<Term>) {
    if f.is_zero() || g.is_zero() {
        return;
    }
    let (mut left, mut right) = (DerivCache::new(f), DerivCache::new(g));
    for n in 0..=order {
        series_order(&mut left, &mut right, matrix, n, out);
    }
}

/// Closed-form product of two pure Gaussian terms.
fn gaussian_pair(a: &Term, b: &Term, matrix: &[[C64; 2]; 2]) -> Result<Term> {
    let (qa, qb) = (a.expo.quad_matrix(), b.expo.quad_matrix());
    let (la, lb) = (a.expo.linear(), b.expo.linear());
    let mut m = DMatrix::<C64>::zeros(4, 4);
    let mut k = DMatrix::<C64>::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = qa[i][j];
            m[(i + 2, j + 2)] = qb[i][j];
            k[(i, j + 2)] = matrix[i][j];
            k[(j + 2, i)] = matrix[i][j];
        }
    }
    let beta = DVector::from_vec(vec![la[0], la[1], lb[0], lb[1]]);
    let img = heat_image(&m, &beta, &k)?;
    let mut quad = [[ZERO; 2]; 2];
    for (i, row) in quad.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = img.quad[(i, j)] + img.quad[(i, j + 2)] + img.quad[(i + 2, j)] + img.quad[(i + 2, j + 2)];
        }
    }
    let linear = [img.linear[0] + img.linear[2], img.linear[1] + img.linear[3]];
    let coeff = a.coeff * b.coeff * img.prefactor * img.shift.exp();
    Ok(Term::new(coeff, 0, 0, QuadExponent::from_parts(quad, linear)))
}

/// `f ⋆ g` for an admissible pair.
pub fn star_product(f: &Symbol, g: &Symbol, star: &BilinearStar) -> Result<Symbol> {
    let b = &star.matrix;
    let (fp, fg) = f.split_polynomial();
    let (gp, gg) = g.split_polynomial();
    let mut out = Vec::new();
    let order = if g.is_polynomial() { fp.degree().min(g.degree()) } else { fp.degree() };
    series(&fp, g, b, order, &mut out);
    series(&fg, &gp, b, gp.degree(), &mut out);
    for a in fg.terms() {
        for c in gg.terms() {
            if a.degree() > 0 || c.degree() > 0 {
                return Err(Error::NonTerminating(format!(
                    "both operands carry polynomial-prefactor Gaussians (left degree {}, right degree {})",
                    a.degree(),
                    c.degree()
                )));
            }
            out.push(gaussian_pair(a, c, b)?);
        }
    }
    Symbol::normalize(out)
}

/// `f ⋆ g − g ⋆ f`.
pub fn star_commutator(f: &Symbol, g: &Symbol, star: &BilinearStar) -> Result<Symbol> {
    Ok(star_product(f, g, star)? - star_product(g, f, star)?)
}

/// Damped bracket `∂qf ∂pg − ∂pf ∂qg − 2γm ∂pf ∂pg`.
pub fn bracket(f: &Symbol, g: &Symbol, gamma: f64, params: &crate::Params) -> Symbol {
    let (fq, fp) = (f.differentiate(Var::Q, 1), f.differentiate(Var::P, 1));
    let (gq, gp) = (g.differentiate(Var::Q, 1), g.differentiate(Var::P, 1));
    &(&fq * &gp) - &(&fp * &gq) - (&fp * &gp).scale(2.0 * gamma * params.m)
}

/// `H ⋆_{−γ} g − g ⋆_γ H`.
pub fn damped_ad(h: &Symbol, g: &Symbol, gamma: f64, params: &crate::Params) -> Result<Symbol> {
    let left = star_product(h, g, &BilinearStar::damped(-gamma, *params))?;
    let right = star_product(g, h, &BilinearStar::damped(gamma, *params))?;
    Ok(left - right)
}

/// `Σ_{n ≤ N} f^{⋆n} / n!` for polynomial `f`.
pub fn star_exp_truncated(f: &Symbol, star: &BilinearStar, order: u32) -> Result<Symbol> {
    if !f.is_polynomial() {
        return Err(Error::NonTerminating("star exponential needs a polynomial generator".into()));
    }
    let mut power = Symbol::one();
    let mut sum = Symbol::one();
    for n in 1..=order {
        power = star_product(&power, f, star)?.scale(1.0 / n as f64);
        sum = &sum + &power;
    }
    Ok(sum)
}

/// Scalar `λ` with `ad^{(γ)}[ap + bq] e^{cp+dq} = λ e^{cp+dq}`.
pub fn hw_eigenvalue(a: f64, b: f64, c: f64, d: f64, gamma: f64, params: &crate::Params) -> Result<C64> {
    let h = Symbol::monomial(a, 1, 0) + Symbol::monomial(b, 0, 1);
    let expo = QuadExponent { bp: C64::new(c, 0.0), bq: C64::new(d, 0.0), ..QuadExponent::ZERO };
    let g = Symbol::gaussian(1.0, expo);
    let image = damped_ad(&h, &g, gamma, params)?;
    let lambda = image.evaluate(0.0, 0.0)?;
    let cmp = crate::symbols::approx_equal(&image, &g.scale(lambda), 1e-10)?;
    if !cmp.equal {
        return Err(Error::NotEigen(cmp.relative()));
    }
    Ok(lambda)
}

/// Phase picked up by `e^{cp+dq}` under `exp(ad^{(γ)}[ap + bq])`.
pub fn hw_phase(a: f64, b: f64, c: f64, d: f64, gamma: f64, params: &crate::Params) -> Result<C64> {
    Ok(hw_eigenvalue(a, b, c, d, gamma, params)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{approx_equal, parse};
    use crate::Params;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ham(p: &Params) -> Symbol {
        Symbol::monomial(0.5 / p.m, 2, 0) + Symbol::monomial(0.5 * p.m * p.omega * p.omega, 0, 2)
    }

    fn ground(p: &Params) -> Symbol {
        let e = QuadExponent {
            app: c(-1.0 / (p.m * p.hbar * p.omega), 0.0),
            aqq: c(-p.m * p.omega / p.hbar, 0.0),
            ..QuadExponent::ZERO
        };
        Symbol::gaussian(2.0, e)
    }

    #[test]
    fn canonical_pair() {
        let p = Params::default();
        let m = BilinearStar::moyal(p);
        let qp = star_product(&Symbol::q(), &Symbol::p(), &m).unwrap();
        assert_eq!(qp, Symbol::monomial(1.0, 1, 1) + Symbol::constant(c(0.0, 0.5)));
        let pq = star_product(&Symbol::p(), &Symbol::q(), &m).unwrap();
        assert_eq!(pq, Symbol::monomial(1.0, 1, 1) + Symbol::constant(c(0.0, -0.5)));
        let comm = star_commutator(&Symbol::q(), &Symbol::p(), &BilinearStar::damped(0.3, p)).unwrap();
        assert_eq!(comm, Symbol::constant(c(0.0, 1.0)));
    }

    #[test]
    fn damped_square_of_p() {
        let p = Params::default();
        let r = star_product(&Symbol::p(), &Symbol::p(), &BilinearStar::damped(0.1, p)).unwrap();
        assert!(approx_equal(&r, &parse("p^2 - 0.1*i").unwrap(), 1e-15).unwrap().equal);
    }

    #[test]
    fn damped_zero_is_moyal() {
        let p = Params::default();
        assert_eq!(BilinearStar::damped(0.0, p).matrix_distance(&BilinearStar::moyal(p)), 0.0);
    }

    #[test]
    fn hamiltonian_on_ground_state() {
        let p = Params::new(1.3, 0.7, 0.9, 0.0).unwrap();
        let r = star_product(&ham(&p), &ground(&p), &BilinearStar::moyal(p)).unwrap();
        let want = ground(&p).scale(0.5 * p.hbar * p.omega);
        assert!(approx_equal(&r, &want, 1e-12).unwrap().equal);
        assert!(star_commutator(&ham(&p), &ham(&p), &BilinearStar::moyal(p)).unwrap().is_zero());
    }

    #[test]
    fn brackets_give_equations_of_motion() {
        let p = Params::new(2.0, 1.5, 1.0, 0.0).unwrap();
        let g = 0.3;
        assert_eq!(bracket(&Symbol::q(), &ham(&p), g, &p), Symbol::monomial(0.5, 1, 0));
        let want = Symbol::monomial(-2.0 * 2.25, 0, 1) + Symbol::monomial(-2.0 * g, 1, 0);
        assert!(approx_equal(&bracket(&Symbol::p(), &ham(&p), g, &p), &want, 1e-15).unwrap().equal);
        assert_eq!(bracket(&Symbol::p(), &Symbol::p(), g, &p), Symbol::constant(-2.0 * g * 2.0));
    }

    #[test]
    fn gaussian_pair_against_series() {
        // Moyal product of two Gaussians, checked against the truncated
        // series of e^{-a p²} ⋆ e^{-b q²} in a convergent regime.
        let p = Params::default().with_hbar(0.2);
        let star = BilinearStar::moyal(p);
        let f = parse("exp(-0.5*p^2)").unwrap();
        let g = parse("exp(-0.5*q^2 + 0.3*p)").unwrap();
        let closed = star_product(&f, &g, &star).unwrap();
        let (mut l, mut r) = (DerivCache::new(&f), DerivCache::new(&g));
        let mut raw = Vec::new();
        for n in 0..=24 {
            series_order(&mut l, &mut r, &star.matrix(), n, &mut raw);
        }
        let series = Symbol::normalize(raw).unwrap();
        let cmp = approx_equal(&closed, &series, 1e-9).unwrap();
        assert!(cmp.equal, "{cmp:?}");
    }

    #[test]
    fn non_admissible_pair_is_rejected() {
        let p = Params::default();
        let f = parse("q*exp(-q^2)").unwrap();
        let g = parse("p*exp(-p^2)").unwrap();
        assert!(matches!(star_product(&f, &g, &BilinearStar::moyal(p)), Err(Error::NonTerminating(_))));
    }

    #[test]
    fn star_exp_of_zero_is_one() {
        let p = Params::default();
        assert_eq!(star_exp_truncated(&Symbol::zero(), &BilinearStar::moyal(p), 7).unwrap(), Symbol::one());
        assert!(star_exp_truncated(&ground(&p), &BilinearStar::moyal(p), 2).is_err());
    }

    #[test]
    fn hw_eigenvalue_formula() {
        // For h = ap + bq and g = e^{cp+dq} the series stops at first order:
        // ad g = -iħ(ad - bc - 2mγac) g.
        let p = Params::new(1.7, 1.0, 0.6, 0.0).unwrap();
        for &(a, b, cc, d, g) in &[(1.0, 0.0, 0.0, 1.0, 0.0), (0.3, -1.2, 0.7, 0.4, 0.25), (1.0, 0.0, 1.0, 0.0, 0.2)] {
            let lam = hw_eigenvalue(a, b, cc, d, g, &p).unwrap();
            let want = c(0.0, -p.hbar * (a * d - b * cc - 2.0 * p.m * g * a * cc));
            assert!((lam - want).norm() < 1e-13, "{lam} vs {want}");
        }
        assert_eq!(hw_phase(0.0, 0.0, 0.5, 0.5, 0.1, &p).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn hw_phase_matches_explicit_series() {
        let p = Params::default();
        let (a, b, cc, d, g) = (0.4, 0.3, -0.5, 0.8, 0.15);
        let h = Symbol::monomial(a, 1, 0) + Symbol::monomial(b, 0, 1);
        let seed = Symbol::gaussian(1.0, QuadExponent { bp: c(cc, 0.0), bq: c(d, 0.0), ..QuadExponent::ZERO });
        let mut term = seed.clone();
        let mut sum = seed.clone();
        for n in 1..30 {
            term = damped_ad(&h, &term, g, &p).unwrap().scale(1.0 / n as f64);
            sum = &sum + &term;
        }
        let phase = hw_phase(a, b, cc, d, g, &p).unwrap();
        assert!(approx_equal(&sum, &seed.scale(phase), 1e-12).unwrap().equal);
    }

    #[test]
    fn unitarity_of_gaussian_closed_form() {
        let p = Params::default();
        for &t in &[0.3f64, 0.7] {
            let tau = (0.5 * t).tan();
            let e = QuadExponent { app: c(0.0, -tau), aqq: c(0.0, -tau), ..QuadExponent::ZERO };
            let u = Symbol::gaussian(1.0 / (0.5 * t).cos(), e);
            let r = star_product(&u.conjugate(), &u, &BilinearStar::moyal(p)).unwrap();
            assert!(approx_equal(&r, &Symbol::one(), 1e-12).unwrap().equal);
        }
    }

    #[test]
    fn adjoint_of_damped_flips_gamma() {
        let p = Params::default();
        let s = BilinearStar::damped(0.2, p).adjoint();
        assert_eq!(s.kind(), StarKind::Damped(-0.2));
        assert!(s.matrix_distance(&BilinearStar::damped(-0.2, p)) < 1e-15);
        assert!(BilinearStar::moyal(p).adjoint().matrix_distance(&BilinearStar::moyal(p)) < 1e-15);
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(3, 2).len(), 4);
        assert_eq!(compositions(2, 3).len(), 6);
        assert_eq!(compositions(0, 3), vec![vec![0, 0, 0]]);
    }
}
