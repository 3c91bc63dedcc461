//! Transition operators `T = exp(½ ∇ᵀ C ∇)` acting on symbols.
//!
//! `T` intertwines star products: `T(f ⋆_B g) = T f ⋆_{B+C} T g`. Polynomials
//! go through the terminating Taylor series; Gaussian terms through the
//! closed-form heat-flow image, with polynomial prefactors produced by the
//! commutation rule `T x_i = (x_i + Σ_j C_ij ∂_j) T`.

use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gaussian::{heat_image, mat2};
use crate::star::{factorial, star_product, BilinearStar};
use crate::symbols::{approx_equal, QuadExponent, Symbol, Term, Var};
use crate::Params;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TransitionKind {
    Damped(f64),
    Standard,
    /// Husimi smoothing with squeeze parameter `s`.
    Husimi(f64),
    Custom,
}

/// `exp(½ ∇ᵀ C ∇)` with symmetric `C` over `(∂q, ∂p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivOperator {
    kind: TransitionKind,
    matrix: [[C64; 2]; 2],
    params: Params,
}

impl DerivOperator {
    /// The operator taking the Moyal product to the damped product `⋆_γ`.
    pub fn damped(gamma: f64, params: Params) -> Self {
        let mut matrix = [[ZERO; 2]; 2];
        matrix[1][1] = C64::new(0.0, -params.hbar * params.m * gamma);
        DerivOperator { kind: TransitionKind::Damped(gamma), matrix, params }
    }

    pub fn standard(params: Params) -> Self {
        let off = C64::new(0.0, -0.5 * params.hbar);
        DerivOperator { kind: TransitionKind::Standard, matrix: [[ZERO, off], [off, ZERO]], params }
    }

    pub fn husimi(s: f64, params: Params) -> Self {
        let matrix = [
            [C64::new(0.5 * params.hbar * s * s, 0.0), ZERO],
            [ZERO, C64::new(0.5 * params.hbar / (s * s), 0.0)],
        ];
        DerivOperator { kind: TransitionKind::Husimi(s), matrix, params }
    }

    pub fn custom(matrix: [[C64; 2]; 2], params: Params) -> Result<Self> {
        if (matrix[0][1] - matrix[1][0]).norm() > 0.0 {
            return Err(Error::InvalidArgument("transition matrix must be symmetric".into()));
        }
        Ok(DerivOperator { kind: TransitionKind::Custom, matrix, params })
    }

    pub fn kind(&self) -> TransitionKind {
        self.kind
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        self.matrix
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn inverse(&self) -> DerivOperator {
        let c = self.matrix;
        let matrix = [[-c[0][0], -c[0][1]], [-c[1][0], -c[1][1]]];
        let kind = match self.kind {
            TransitionKind::Damped(g) => TransitionKind::Damped(-g),
            _ => TransitionKind::Custom,
        };
        DerivOperator { kind, matrix, params: self.params }
    }

    /// The product `⋆'` with `T(f ⋆ g) = T f ⋆' T g` for the Moyal `⋆`.
    pub fn target_star(&self) -> BilinearStar {
        self.image_of(&BilinearStar::moyal(self.params))
    }

    /// The product `⋆'` with `T(f ⋆ g) = T f ⋆' T g` for a given `⋆`.
    pub fn image_of(&self, star: &BilinearStar) -> BilinearStar {
        let (b, c) = (star.matrix(), self.matrix);
        let mut m = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = b[i][j] + c[i][j];
            }
        }
        let candidates = [
            BilinearStar::moyal(self.params),
            BilinearStar::standard(self.params),
            match self.kind {
                TransitionKind::Damped(g) => BilinearStar::damped(g, self.params),
                TransitionKind::Husimi(s) => BilinearStar::husimi(s, self.params),
                _ => BilinearStar::moyal(self.params),
            },
        ];
        let custom = BilinearStar::from_matrix(m, self.params);
        candidates
            .into_iter()
            .find(|s| s.matrix_distance(&custom) < 1e-15)
            .unwrap_or(custom)
    }

    pub fn apply(&self, f: &Symbol) -> Result<Symbol> {
        let (poly, rest) = f.split_polynomial();
        let mut out: Vec<Term> = self.apply_polynomial(&poly).terms().to_vec();
        let mut groups: Vec<(QuadExponent, Vec<Term>)> = Vec::new();
        for t in rest.terms() {
            match groups.iter_mut().find(|(e, _)| *e == t.expo) {
                Some((_, v)) => v.push(*t),
                None => groups.push((t.expo, vec![*t])),
            }
        }
        for (expo, terms) in groups {
            out.extend(self.apply_gaussian_group(&expo, &terms)?.terms().iter().copied());
        }
        Symbol::normalize(out)
    }

    /// Terminating Taylor series of `exp(½ ∇ᵀ C ∇)`.
    fn apply_polynomial(&self, f: &Symbol) -> Symbol {
        if f.is_zero() {
            return Symbol::zero();
        }
        let c = self.matrix;
        let (dq, dp) = (f.degree_in(Var::Q), f.degree_in(Var::P));
        let mut out = Vec::new();
        for kqp in 0..=dq.min(dp) {
            for kqq in 0..=(dq - kqp) / 2 {
                for kpp in 0..=(dp - kqp) / 2 {
                    let coef = (c[0][0] * 0.5).powu(kqq) / factorial(kqq)
                        * c[0][1].powu(kqp) / factorial(kqp)
                        * (c[1][1] * 0.5).powu(kpp) / factorial(kpp);
                    if coef == ZERO {
                        continue;
                    }
                    let d = f.mixed_derivative(2 * kqq + kqp, kqp + 2 * kpp);
                    out.extend(d.terms().iter().map(|t| Term { coeff: t.coeff * coef, ..*t }));
                }
            }
        }
        Symbol::from_terms(out)
    }

    /// Image of `Σ c_k p^a q^b exp(expo)` for terms sharing one exponent.
    fn apply_gaussian_group(&self, expo: &QuadExponent, terms: &[Term]) -> Result<Symbol> {
        let m = mat2(expo.quad_matrix());
        let lin = expo.linear();
        let beta = DVector::from_vec(vec![lin[0], lin[1]]);
        let img = heat_image(&m, &beta, &mat2(self.matrix))?;
        let quad = [[img.quad[(0, 0)], img.quad[(0, 1)]], [img.quad[(1, 0)], img.quad[(1, 1)]]];
        let base_expo = QuadExponent::from_parts(quad, [img.linear[0], img.linear[1]]);
        let base = Symbol::gaussian(img.prefactor * img.shift.exp(), base_expo);

        // images[(a, b)] = (p + (C∇)_p)^a (q + (C∇)_q)^b T(exp(expo))
        let mut images: HashMap<(u32, u32), Symbol> = HashMap::new();
        images.insert((0, 0), base);
        let mut out = Vec::new();
        for t in terms {
            let img = self.raised(&mut images, t.pow_p, t.pow_q);
            out.extend(img.terms().iter().map(|s| Term { coeff: s.coeff * t.coeff, ..*s }));
        }
        Ok(Symbol::from_terms(out))
    }

    fn raised(&self, cache: &mut HashMap<(u32, u32), Symbol>, a: u32, b: u32) -> Symbol {
        if let Some(s) = cache.get(&(a, b)) {
            return s.clone();
        }
        let c = self.matrix;
        let s = if b > 0 {
            let prev = self.raised(cache, a, b - 1);
            &(&Symbol::q() * &prev)
                + &(prev.differentiate(Var::Q, 1).scale(c[0][0]) + prev.differentiate(Var::P, 1).scale(c[0][1]))
        } else {
            let prev = self.raised(cache, a - 1, 0);
            &(&Symbol::p() * &prev)
                + &(prev.differentiate(Var::Q, 1).scale(c[1][0]) + prev.differentiate(Var::P, 1).scale(c[1][1]))
        };
        cache.insert((a, b), s.clone());
        s
    }
}

/// Relative residual of the intertwining identity for `op` and `star`.
///
/// If `star` is the image of the Moyal product under `op`, checks
/// `op(f ⋆_M g) = op f ⋆ op g`; if instead `op` maps `star` to the Moyal
/// product, checks `op(f ⋆ g) = op f ⋆_M op g`. Any other `star` is treated
/// as the source product of the identity.
pub fn check_equivalence(f: &Symbol, g: &Symbol, star: &BilinearStar, op: &DerivOperator) -> Result<f64> {
    let params = op.params();
    let moyal = BilinearStar::moyal(params);
    let (source, target) = if star.matrix_distance(&op.target_star()) < 1e-15 {
        (moyal, *star)
    } else {
        (*star, op.image_of(star))
    };
    let lhs = op.apply(&star_product(f, g, &source)?)?;
    let rhs = star_product(&op.apply(f)?, &op.apply(g)?, &target)?;
    Ok(approx_equal(&lhs, &rhs, 1.0)?.relative())
}

/// Husimi-smoothed phase-space function `T_H(s) ρ`.
pub fn husimi_distribution(rho: &Symbol, s: f64, params: &Params) -> Result<Symbol> {
    DerivOperator::husimi(s, *params).apply(rho)
}
