//! Phase-space symbols in the closed class `polynomial × exp(quadratic form)`.
//!
//! A [`Symbol`] is a finite sum of [`Term`]s
//! `c · p^a · q^b · exp(app p² + aqq q² + apq pq + bp p + bq q)`
//! with complex coefficients. The class is closed under addition,
//! pointwise multiplication, differentiation and complex conjugation, and
//! every operation here is exact up to floating-point rounding.

mod parse;
mod print;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use parse::parse;

/// Exponents closer than this (entry-wise) are treated as identical.
pub const MERGE_TOL: f64 = 1e-12;

/// Largest real exponent accepted by [`Symbol::evaluate`].
pub const MAX_EXPONENT: f64 = 700.0;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Physical constants in natural units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub m: f64,
    pub omega: f64,
    pub hbar: f64,
    #[serde(default)]
    pub gamma: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { m: 1.0, omega: 1.0, hbar: 1.0, gamma: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

impl Params {
    pub fn new(m: f64, omega: f64, hbar: f64, gamma: f64) -> Result<Self> {
        let params = Params { m, omega, hbar, gamma };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.m, self.omega, self.hbar, self.gamma];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        if self.m <= 0.0 || self.omega <= 0.0 || self.hbar <= 0.0 {
            return Err(Error::InvalidArgument("m, omega and hbar must be positive".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidArgument("gamma must be non-negative".into()));
        }
        Ok(())
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Params { gamma, ..self }
    }

    pub fn with_hbar(self, hbar: f64) -> Self {
        Params { hbar, ..self }
    }

    pub fn regime(&self) -> Regime {
        if (self.gamma - self.omega).abs() < 1e-12 {
            Regime::Critical
        } else if self.gamma < self.omega {
            Regime::Underdamped
        } else {
            Regime::Overdamped
        }
    }
}

/// Quadratic exponent `app p² + aqq q² + apq pq + bp p + bq q`.
///
/// The additive constant is folded into the owning term's coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct QuadExponent {
    pub app: C64,
    pub aqq: C64,
    pub apq: C64,
    pub bp: C64,
    pub bq: C64,
}

impl QuadExponent {
    pub const ZERO: QuadExponent = QuadExponent { app: ZERO, aqq: ZERO, apq: ZERO, bp: ZERO, bq: ZERO };

    fn entries(&self) -> [C64; 5] {
        [self.app, self.aqq, self.apq, self.bp, self.bq]
    }

    pub fn is_zero(&self) -> bool {
        self.entries().iter().all(|z| *z == ZERO)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }

    pub fn value(&self, p: f64, q: f64) -> C64 {
        self.app * (p * p) + self.aqq * (q * q) + self.apq * (p * q) + self.bp * p + self.bq * q
    }

    /// Entry-wise maximum distance.
    pub fn distance(&self, other: &QuadExponent) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn conj(&self) -> QuadExponent {
        QuadExponent {
            app: self.app.conj(),
            aqq: self.aqq.conj(),
            apq: self.apq.conj(),
            bp: self.bp.conj(),
            bq: self.bq.conj(),
        }
    }

    /// Symmetric matrix of the quadratic part over the basis `(q, p)`.
    pub fn quad_matrix(&self) -> [[C64; 2]; 2] {
        let off = self.apq * 0.5;
        [[self.aqq, off], [off, self.app]]
    }

    /// Linear coefficients over the basis `(q, p)`.
    pub fn linear(&self) -> [C64; 2] {
        [self.bq, self.bp]
    }

    /// Inverse of [`quad_matrix`](Self::quad_matrix) / [`linear`](Self::linear).
    /// The off-diagonal entries are averaged.
    pub fn from_parts(quad: [[C64; 2]; 2], linear: [C64; 2]) -> QuadExponent {
        QuadExponent {
            aqq: quad[0][0],
            app: quad[1][1],
            apq: quad[0][1] + quad[1][0],
            bq: linear[0],
            bp: linear[1],
        }
    }

    fn sort_key(&self) -> [f64; 10] {
        let e = self.entries();
        let mut key = [0.0; 10];
        for (i, z) in e.iter().enumerate() {
            key[2 * i] = z.re;
            key[2 * i + 1] = z.im;
        }
        key
    }
}

impl Add for QuadExponent {
    type Output = QuadExponent;
    fn add(self, o: QuadExponent) -> QuadExponent {
        QuadExponent {
            app: self.app + o.app,
            aqq: self.aqq + o.aqq,
            apq: self.apq + o.apq,
            bp: self.bp + o.bp,
            bq: self.bq + o.bq,
        }
    }
}

/// `coeff · p^pow_p · q^pow_q · exp(expo)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub pow_p: u32,
    pub pow_q: u32,
    pub expo: QuadExponent,
}

impl Term {
    pub fn new(coeff: C64, pow_p: u32, pow_q: u32, expo: QuadExponent) -> Self {
        Term { coeff, pow_p, pow_q, expo }
    }

    pub fn monomial(coeff: C64, pow_p: u32, pow_q: u32) -> Self {
        Term::new(coeff, pow_p, pow_q, QuadExponent::ZERO)
    }

    pub fn degree(&self) -> u32 {
        self.pow_p + self.pow_q
    }

    fn cmp_canonical(&self, other: &Term) -> Ordering {
        (self.pow_p, self.pow_q).cmp(&(other.pow_p, other.pow_q)).then_with(|| {
            let (a, b) = (self.expo.sort_key(), other.expo.sort_key());
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    }
}

/// Which phase-space coordinate to differentiate with respect to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    P,
    Q,
}

/// A canonical finite sum of terms. The empty sum is the zero symbol.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Symbol {
    terms: Vec<Term>,
}

impl Symbol {
    /// Brings raw terms into canonical form, rejecting non-finite input.
    pub fn normalize(raw: Vec<Term>) -> Result<Symbol> {
        if raw.iter().any(|t| !t.coeff.is_finite() || !t.expo.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Symbol::from_terms(raw))
    }

    /// Canonical form without the finiteness check.
    pub(crate) fn from_terms(raw: Vec<Term>) -> Symbol {
        let mut groups: BTreeMap<(u32, u32), Vec<Term>> = BTreeMap::new();
        for mut t in raw {
            if t.coeff == ZERO {
                continue;
            }
            if t.expo.distance(&QuadExponent::ZERO) < MERGE_TOL {
                t.expo = QuadExponent::ZERO;
            }
            let cluster = groups.entry((t.pow_p, t.pow_q)).or_default();
            match cluster.iter_mut().find(|c| c.expo.distance(&t.expo) < MERGE_TOL) {
                Some(c) => c.coeff += t.coeff,
                None => cluster.push(t),
            }
        }
        let mut terms: Vec<Term> = groups
            .into_values()
            .flatten()
            .filter(|t| t.coeff != ZERO)
            .collect();
        terms.sort_by(Term::cmp_canonical);
        Symbol { terms }
    }

    pub fn zero() -> Symbol {
        Symbol::default()
    }

    pub fn constant(c: impl Into<C64>) -> Symbol {
        Symbol::from_terms(vec![Term::monomial(c.into(), 0, 0)])
    }

    pub fn one() -> Symbol {
        Symbol::constant(1.0)
    }

    pub fn p() -> Symbol {
        Symbol::monomial(1.0, 1, 0)
    }

    pub fn q() -> Symbol {
        Symbol::monomial(1.0, 0, 1)
    }

    pub fn monomial(c: impl Into<C64>, pow_p: u32, pow_q: u32) -> Symbol {
        Symbol::from_terms(vec![Term::monomial(c.into(), pow_p, pow_q)])
    }

    pub fn gaussian(c: impl Into<C64>, expo: QuadExponent) -> Symbol {
        Symbol::from_terms(vec![Term::new(c.into(), 0, 0, expo)])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every exponent is zero.
    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|t| t.expo.is_zero())
    }

    /// Highest monomial degree over all terms (0 for the zero symbol).
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Term::degree).max().unwrap_or(0)
    }

    /// Highest power of `var` over all terms.
    pub fn degree_in(&self, var: Var) -> u32 {
        self.terms
            .iter()
            .map(|t| match var {
                Var::P => t.pow_p,
                Var::Q => t.pow_q,
            })
            .max()
            .unwrap_or(0)
    }

    /// The coefficient of a constant symbol, `None` otherwise.
    pub fn as_constant(&self) -> Option<C64> {
        match self.terms.as_slice() {
            [] => Some(ZERO),
            [t] if t.pow_p == 0 && t.pow_q == 0 && t.expo.is_zero() => Some(t.coeff),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_finite() && t.expo.is_finite())
    }

    fn ensure_finite(self) -> Result<Symbol> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Splits into the pure-polynomial part and the remainder.
    pub fn split_polynomial(&self) -> (Symbol, Symbol) {
        let (poly, rest): (Vec<Term>, Vec<Term>) = self.terms.iter().partition(|t| t.expo.is_zero());
        (Symbol { terms: poly }, Symbol { terms: rest })
    }

    pub fn scale(&self, c: impl Into<C64>) -> Symbol {
        let c = c.into();
        Symbol::from_terms(self.terms.iter().map(|t| Term { coeff: t.coeff * c, ..*t }).collect())
    }

    pub fn pow(&self, n: u32) -> Symbol {
        (0..n).fold(Symbol::one(), |acc, _| &acc * self)
    }

    pub fn conjugate(&self) -> Symbol {
        Symbol::from_terms(
            self.terms
                .iter()
                .map(|t| Term { coeff: t.coeff.conj(), expo: t.expo.conj(), ..*t })
                .collect(),
        )
    }

    /// Real part taken coefficient- and exponent-wise is not meaningful, so
    /// this is `(f + conj f) / 2`.
    pub fn real_part(&self) -> Symbol {
        (self + &self.conjugate()).scale(0.5)
    }

    pub fn differentiate(&self, var: Var, order: u32) -> Symbol {
        (0..order).fold(self.clone(), |acc, _| acc.derivative(var))
    }

    fn derivative(&self, var: Var) -> Symbol {
        let mut out = Vec::with_capacity(self.terms.len() * 4);
        for t in &self.terms {
            let e = &t.expo;
            match var {
                Var::P => {
                    if t.pow_p > 0 {
                        out.push(Term { coeff: t.coeff * t.pow_p as f64, pow_p: t.pow_p - 1, ..*t });
                    }
                    out.push(Term { coeff: t.coeff * e.app * 2.0, pow_p: t.pow_p + 1, ..*t });
                    out.push(Term { coeff: t.coeff * e.apq, pow_q: t.pow_q + 1, ..*t });
                    out.push(Term { coeff: t.coeff * e.bp, ..*t });
                }
                Var::Q => {
                    if t.pow_q > 0 {
                        out.push(Term { coeff: t.coeff * t.pow_q as f64, pow_q: t.pow_q - 1, ..*t });
                    }
                    out.push(Term { coeff: t.coeff * e.aqq * 2.0, pow_q: t.pow_q + 1, ..*t });
                    out.push(Term { coeff: t.coeff * e.apq, pow_p: t.pow_p + 1, ..*t });
                    out.push(Term { coeff: t.coeff * e.bq, ..*t });
                }
            }
        }
        Symbol::from_terms(out)
    }

    /// `∂q^nq ∂p^np`.
    pub fn mixed_derivative(&self, nq: u32, np: u32) -> Symbol {
        self.differentiate(Var::Q, nq).differentiate(Var::P, np)
    }

    pub fn evaluate(&self, p: f64, q: f64) -> Result<C64> {
        let mut acc = ZERO;
        for t in &self.terms {
            acc += eval_term(t, p, q)?;
        }
        Ok(acc)
    }

    /// Evaluation plan that shares one `exp` per distinct exponent.
    pub fn compile(&self) -> CompiledSymbol {
        let mut groups: Vec<ExponentGroup> = Vec::new();
        for t in &self.terms {
            let mono = (t.coeff, t.pow_p as i32, t.pow_q as i32);
            match groups.iter_mut().find(|(e, _)| *e == t.expo) {
                Some((_, v)) => v.push(mono),
                None => groups.push((t.expo, vec![mono])),
            }
        }
        CompiledSymbol { groups }
    }

    /// Largest modulus over the verification lattice.
    pub fn sup_norm(&self) -> Result<f64> {
        let plan = self.compile();
        let mut sup = 0.0f64;
        for (p, q) in verification_lattice() {
            sup = sup.max(plan.evaluate(p, q)?.norm());
        }
        Ok(sup)
    }
}

fn eval_term(t: &Term, p: f64, q: f64) -> Result<C64> {
    let mono = t.coeff * p.powi(t.pow_p as i32) * q.powi(t.pow_q as i32);
    if t.expo.is_zero() {
        return Ok(mono);
    }
    let e = t.expo.value(p, q);
    if e.re > MAX_EXPONENT {
        return Err(Error::Overflow(e.re));
    }
    Ok(mono * e.exp())
}

/// A symbol regrouped by exponent for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledSymbol {
    groups: Vec<ExponentGroup>,
}

// Monomials `(coeff, pow_p, pow_q)` sharing one exponent.
type ExponentGroup = (QuadExponent, Vec<(C64, i32, i32)>);

impl CompiledSymbol {
    pub fn evaluate(&self, p: f64, q: f64) -> Result<C64> {
        let mut acc = ZERO;
        for (expo, monos) in &self.groups {
            let poly: C64 = monos.iter().map(|&(c, a, b)| c * p.powi(a) * q.powi(b)).sum();
            if expo.is_zero() {
                acc += poly;
                continue;
            }
            let e = expo.value(p, q);
            if e.re > MAX_EXPONENT {
                return Err(Error::Overflow(e.re));
            }
            acc += poly * e.exp();
        }
        Ok(acc)
    }
}

/// Nodes of the 9×9 verification lattice on `[-3, 3]²`, as `(p, q)` pairs.
pub fn verification_lattice() -> impl Iterator<Item = (f64, f64)> {
    (0..9).flat_map(|i| (0..9).map(move |j| (-3.0 + 0.75 * j as f64, -3.0 + 0.75 * i as f64)))
}

/// Outcome of an evaluation-based comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub equal: bool,
    /// `sup |f - g|` over the lattice.
    pub residual: f64,
    /// `sup |f|` over the lattice.
    pub scale: f64,
}

impl Comparison {
    /// Residual relative to `1 + sup |f|`.
    pub fn relative(&self) -> f64 {
        self.residual / (1.0 + self.scale)
    }
}

/// Evaluation-based equality on the verification lattice:
/// `sup |f - g| <= tol · (1 + sup |f|)`.
pub fn approx_equal(f: &Symbol, g: &Symbol, tol: f64) -> Result<Comparison> {
    if tol.partial_cmp(&0.0) != Some(Ordering::Greater) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let (pf, pg) = (f.compile(), g.compile());
    let (mut residual, mut scale) = (0.0f64, 0.0f64);
    for (p, q) in verification_lattice() {
        let a = pf.evaluate(p, q)?;
        let b = pg.evaluate(p, q)?;
        residual = residual.max((a - b).norm());
        scale = scale.max(a.norm());
    }
    Ok(Comparison { equal: residual <= tol * (1.0 + scale), residual, scale })
}

/// `a·f + b·g`.
pub fn combine(f: &Symbol, a: impl Into<C64>, g: &Symbol, b: impl Into<C64>) -> Result<Symbol> {
    let (a, b) = (a.into(), b.into());
    let raw = f
        .terms
        .iter()
        .map(|t| Term { coeff: t.coeff * a, ..*t })
        .chain(g.terms.iter().map(|t| Term { coeff: t.coeff * b, ..*t }))
        .collect();
    Symbol::normalize(raw)
}

pub fn pointwise_multiply(f: &Symbol, g: &Symbol) -> Result<Symbol> {
    (f * g).ensure_finite()
}

impl Add for &Symbol {
    type Output = Symbol;
    fn add(self, rhs: &Symbol) -> Symbol {
        Symbol::from_terms(self.terms.iter().chain(rhs.terms.iter()).copied().collect())
    }
}

impl Sub for &Symbol {
    type Output = Symbol;
    fn sub(self, rhs: &Symbol) -> Symbol {
        let neg = rhs.terms.iter().map(|t| Term { coeff: -t.coeff, ..*t });
        Symbol::from_terms(self.terms.iter().copied().chain(neg).collect())
    }
}

impl Mul for &Symbol {
    type Output = Symbol;
    fn mul(self, rhs: &Symbol) -> Symbol {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                out.push(Term {
                    coeff: a.coeff * b.coeff,
                    pow_p: a.pow_p + b.pow_p,
                    pow_q: a.pow_q + b.pow_q,
                    expo: a.expo + b.expo,
                });
            }
        }
        Symbol::from_terms(out)
    }
}

impl Neg for &Symbol {
    type Output = Symbol;
    fn neg(self) -> Symbol {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Symbol {
            type Output = Symbol;
            fn $m(self, rhs: Symbol) -> Symbol { (&self).$m(&rhs) }
        }
        impl $tr<&Symbol> for Symbol {
            type Output = Symbol;
            fn $m(self, rhs: &Symbol) -> Symbol { (&self).$m(rhs) }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Symbol {
    type Output = Symbol;
    fn neg(self) -> Symbol {
        -&self
    }
}

impl std::iter::Sum for Symbol {
    fn sum<I: Iterator<Item = Symbol>>(iter: I) -> Symbol {
        Symbol::from_terms(iter.flat_map(|s| s.terms).collect())
    }
}

/// Rectangular lattice description.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
}

impl GridSpec {
    pub fn new(q_min: f64, q_max: f64, p_min: f64, p_max: f64, nq: usize, np: usize) -> Result<Self> {
        let spec = GridSpec { q_min, q_max, p_min, p_max, nq, np };
        spec.validate()?;
        Ok(spec)
    }

    /// Symmetric square lattice `[-half, half]²` with `n` nodes per axis.
    pub fn square(half: f64, n: usize) -> Self {
        GridSpec { q_min: -half, q_max: half, p_min: -half, p_max: half, nq: n, np: n }
    }

    /// The 9×9 lattice on `[-3, 3]²` used for symbol equality.
    pub fn verification() -> Self {
        GridSpec::square(3.0, 9)
    }

    /// The 201×201 lattice on `[-6, 6]²` used for integrals and RK4.
    pub fn large() -> Self {
        GridSpec::square(6.0, 201)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.q_min, self.q_max, self.p_min, self.p_max].iter().all(|x| x.is_finite());
        if !finite || self.q_min >= self.q_max || self.p_min >= self.p_max {
            return Err(Error::InvalidGrid("bounds must be finite and increasing".into()));
        }
        if self.nq < 2 || self.np < 2 {
            return Err(Error::InvalidGrid("at least two nodes per axis".into()));
        }
        Ok(())
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.nq - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn q_node(&self, i: usize) -> f64 {
        if i + 1 == self.nq {
            self.q_max
        } else {
            self.q_min + self.dq() * i as f64
        }
    }

    pub fn p_node(&self, j: usize) -> f64 {
        if j + 1 == self.np {
            self.p_max
        } else {
            self.p_min + self.dp() * j as f64
        }
    }

    pub fn len(&self) -> usize {
        self.nq * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
