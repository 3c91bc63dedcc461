//! Evolution of phase-space functions under the damped oscillator.
//!
//! For the quadratic Hamiltonian the corrected damped equation
//! `iħ ∂tρ = H ⋆_{−γ} ρ − ρ ⋆_γ H` is exactly the classical Liouville
//! equation `∂tρ = −{ρ, H}_γ`, so its solution is transport along the
//! backward classical flow.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre_2d;
use crate::oscillator::{energy, hamiltonian, sho_offdiagonal};
use crate::star::{damped_ad, star_commutator, BilinearStar};
use crate::symbols::{verification_lattice, QuadExponent, Regime, Symbol, Term};
use crate::Params;

/// Linear flow `(q, p) ↦ L (q, p)` of `q̇ = p/m`, `ṗ = −mω²q − 2γp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowMap {
    /// Row-major over `(q, p)`.
    pub l: [[f64; 2]; 2],
    pub t: f64,
    pub regime: Regime,
}

impl FlowMap {
    pub fn identity() -> Self {
        FlowMap { l: [[1.0, 0.0], [0.0, 1.0]], t: 0.0, regime: Regime::Underdamped }
    }

    pub fn det(&self) -> f64 {
        self.l[0][0] * self.l[1][1] - self.l[0][1] * self.l[1][0]
    }

    pub fn apply(&self, q: f64, p: f64) -> (f64, f64) {
        (self.l[0][0] * q + self.l[0][1] * p, self.l[1][0] * q + self.l[1][1] * p)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FlowMap) -> FlowMap {
        let (a, b) = (self.l, other.l);
        let mut l = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                l[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        FlowMap { l, t: self.t + other.t, regime: self.regime }
    }
}

/// `exp(tA)` with `A = [[0, 1/m], [−mω², −2γ]]`, written as
/// `e^{−γt}(c(t) I + s(t)(A + γI))`.
pub fn flow_map(t: f64, params: &Params) -> FlowMap {
    let (m, w, g) = (params.m, params.omega, params.gamma);
    let regime = params.regime();
    let (c, s) = match regime {
        Regime::Critical => (1.0, t),
        Regime::Underdamped => {
            let big = (w * w - g * g).sqrt();
            ((big * t).cos(), (big * t).sin() / big)
        }
        Regime::Overdamped => {
            let k = (g * g - w * w).sqrt();
            ((k * t).cosh(), (k * t).sinh() / k)
        }
    };
    let e = (-g * t).exp();
    let l = [[e * (c + s * g), e * s / m], [-e * s * m * w * w, e * (c - s * g)]];
    FlowMap { l, t, regime }
}

/// `ρ ∘ L`: substitutes `(q, p) ← L(q, p)` term by term.
pub fn pullback(rho: &Symbol, map: &FlowMap) -> Symbol {
    let l = map.l;
    let qnew = Symbol::monomial(l[0][0], 0, 1) + Symbol::monomial(l[0][1], 1, 0);
    let pnew = Symbol::monomial(l[1][0], 0, 1) + Symbol::monomial(l[1][1], 1, 0);
    let mut qpow = vec![Symbol::one()];
    let mut ppow = vec![Symbol::one()];
    let mut out = Vec::new();
    for t in rho.terms() {
        while qpow.len() <= t.pow_q as usize {
            let next = qpow.last().map(|s| s * &qnew).unwrap_or_default();
            qpow.push(next);
        }
        while ppow.len() <= t.pow_p as usize {
            let next = ppow.last().map(|s| s * &pnew).unwrap_or_default();
            ppow.push(next);
        }
        let expo = congruence(&t.expo, &l);
        let mono = &qpow[t.pow_q as usize] * &ppow[t.pow_p as usize];
        out.extend(mono.terms().iter().map(|s| Term::new(s.coeff * t.coeff, s.pow_p, s.pow_q, expo)));
    }
    Symbol::from_terms(out)
}

fn congruence(e: &QuadExponent, l: &[[f64; 2]; 2]) -> QuadExponent {
    if e.is_zero() {
        return *e;
    }
    let a = e.quad_matrix();
    let b = e.linear();
    let mut quad = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for n in 0..2 {
                    quad[i][j] += a[k][n] * (l[k][i] * l[n][j]);
                }
            }
        }
    }
    let linear = [b[0] * l[0][0] + b[1] * l[1][0], b[0] * l[0][1] + b[1] * l[1][1]];
    QuadExponent::from_parts(quad, linear)
}

/// Exact solution `ρ(t) = ρ0 ∘ L(−t)` of the damped evolution equation.
pub fn evolve_classical(rho0: &Symbol, t: f64, params: &Params) -> Symbol {
    pullback(rho0, &flow_map(-t, params))
}

/// `∂tρ` of the damped equation, `(H ⋆_{−γ} ρ − ρ ⋆_γ H)/(iħ)`.
pub fn damped_rhs(rho: &Symbol, params: &Params) -> Result<Symbol> {
    let ad = damped_ad(&hamiltonian(params), rho, params.gamma, params)?;
    Ok(ad.scale(C64::new(0.0, -1.0 / params.hbar)))
}

/// `∂tρ` of the rejected equation `iħ ∂tρ = −[ρ, H]_{⋆_γ}`.
pub fn naive_rhs(rho: &Symbol, params: &Params) -> Result<Symbol> {
    let comm = star_commutator(rho, &hamiltonian(params), &BilinearStar::damped(params.gamma, *params))?;
    Ok(comm.scale(C64::new(0.0, 1.0 / params.hbar)))
}

/// The undamped Moyal equation's right-hand side `−[ρ, H]_⋆/(iħ)`.
pub fn moyal_rhs(rho: &Symbol, params: &Params) -> Result<Symbol> {
    let comm = star_commutator(rho, &hamiltonian(params), &BilinearStar::moyal(*params))?;
    Ok(comm.scale(C64::new(0.0, 1.0 / params.hbar)))
}

/// `sup |Im ρ̇|` over the verification lattice.
pub fn reality_defect(rho_dot: &Symbol) -> Result<f64> {
    let plan = rho_dot.compile();
    let mut sup = 0.0f64;
    for (p, q) in verification_lattice() {
        sup = sup.max(plan.evaluate(p, q)?.im.abs());
    }
    Ok(sup)
}

/// Amplitudes `R_{n,n'}` of an expansion in off-diagonal elements.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpansionCoeffs {
    pub entries: BTreeMap<(usize, usize), C64>,
}

impl ExpansionCoeffs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, n: usize, n2: usize, amplitude: C64) {
        self.entries.insert((n, n2), amplitude);
    }

    /// Coherent-state amplitudes `e^{−|α|²} αⁿ ᾱ^{n'} / √(n! n'!)` on `n + n' ≤ max_sum`.
    pub fn coherent(alpha: C64, max_sum: usize) -> Self {
        let mut out = ExpansionCoeffs::new();
        let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
        for n in 0..=max_sum {
            for n2 in 0..=(max_sum - n) {
                let r = (-alpha.norm_sqr()).exp() * alpha.powu(n as u32) * alpha.conj().powu(n2 as u32)
                    / (fact(n) * fact(n2)).sqrt();
                out.insert(n, n2, r);
            }
        }
        out
    }

    /// Largest violation of `R_{n,n'} = conj(R_{n',n})`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries
            .iter()
            .map(|(&(n, n2), r)| match self.entries.get(&(n2, n)) {
                Some(s) => (r - s.conj()).norm(),
                None => r.norm(),
            })
            .fold(0.0, f64::max)
    }
}

/// `Σ R_{n,n'} e^{−i(E_n − E_{n'})t/ħ} ρ_{n,n'}`.
pub fn evolve_eigenexpansion(coeffs: &ExpansionCoeffs, t: f64, params: &Params) -> Result<Symbol> {
    let mut out = Vec::new();
    for (&(n, n2), &r) in &coeffs.entries {
        let phase = C64::new(0.0, -(energy(n, params) - energy(n2, params)) * t / params.hbar).exp();
        let rho = sho_offdiagonal(n, n2, params)?;
        out.extend(rho.terms().iter().map(|s| Term { coeff: s.coeff * r * phase, ..*s }));
    }
    Symbol::normalize(out)
}

/// Least-squares amplitudes of `ρ` in the span of `ρ_{n,n'}`, `(n, n') ∈ support`,
/// from Gauss–Legendre overlap integrals on `[−half, half]²`.
pub fn project_onto_offdiagonals(
    rho: &Symbol,
    support: &[(usize, usize)],
    half: f64,
    nodes: usize,
    params: &Params,
) -> Result<ExpansionCoeffs> {
    let rule = gauss_legendre_2d(-half, half, nodes);
    let basis: Vec<_> = support
        .iter()
        .map(|&(n, n2)| sho_offdiagonal(n, n2, params).map(|s| s.compile()))
        .collect::<Result<_>>()?;
    let target = rho.compile();
    let k = basis.len();
    let mut samples = vec![vec![C64::new(0.0, 0.0); rule.len()]; k];
    let mut rhs_samples = Vec::with_capacity(rule.len());
    for (idx, &(p, q, _)) in rule.iter().enumerate() {
        for (b, plan) in basis.iter().enumerate() {
            samples[b][idx] = plan.evaluate(p, q)?;
        }
        rhs_samples.push(target.evaluate(p, q)?);
    }
    let mut gram = DMatrix::<C64>::zeros(k, k);
    let mut rhs = DVector::<C64>::zeros(k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = rule.iter().enumerate().map(|(x, r)| samples[i][x].conj() * samples[j][x] * r.2).sum();
        }
        rhs[i] = rule.iter().enumerate().map(|(x, r)| samples[i][x].conj() * rhs_samples[x] * r.2).sum();
    }
    let sol = gram.lu().solve(&rhs).ok_or_else(|| Error::InvalidArgument("singular Gram matrix".into()))?;
    let mut out = ExpansionCoeffs::new();
    for (i, &(n, n2)) in support.iter().enumerate() {
        out.insert(n, n2, sol[i]);
    }
    Ok(out)
}

/// One term `R · e^{−i(conj(ℰ) − ℰ')t/ħ} · ρ` of the damped ansatz.
#[derive(Clone, Debug)]
pub struct AnsatzEntry {
    pub amplitude: C64,
    pub left: C64,
    pub right: C64,
    pub symbol: Symbol,
}

/// Evolves a superposition of damped modes; every `ℰ` must have `Im ℰ ≥ 0`.
pub fn evolve_damped_ansatz(entries: &[AnsatzEntry], t: f64, params: &Params) -> Result<Symbol> {
    let mut out = Vec::new();
    for e in entries {
        for z in [e.left, e.right] {
            if z.im < 0.0 {
                return Err(Error::Positivity(z.im));
            }
        }
        let factor = (C64::new(0.0, -t / params.hbar) * (e.left.conj() - e.right)).exp() * e.amplitude;
        out.extend(e.symbol.terms().iter().map(|s| Term { coeff: s.coeff * factor, ..*s }));
    }
    Symbol::normalize(out)
}
