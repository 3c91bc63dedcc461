//! Grid sampling, independent numerical oracles and export.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::star::{series_order, BilinearStar, DerivCache};
use crate::symbols::{GridSpec, Symbol};
use crate::Params;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Complex samples on a [`GridSpec`], stored q-major: index `iq * np + ip`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub spec: GridSpec,
    pub values: Vec<C64>,
}

impl PhaseGrid {
    pub fn new(spec: GridSpec, values: Vec<C64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!("expected {} values, got {}", spec.len(), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(PhaseGrid { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        PhaseGrid { spec, values: vec![ZERO; spec.len()] }
    }

    pub fn get(&self, iq: usize, ip: usize) -> C64 {
        self.values[iq * self.spec.np + ip]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|Im|` over the grid.
    pub fn imaginary_sup(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Node `(q, p)` with the largest modulus.
    pub fn argmax(&self) -> (f64, f64) {
        let (k, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bk, bv), (k, v)| if v.norm() > bv { (k, v.norm()) } else { (bk, bv) });
        (self.spec.q_node(k / self.spec.np), self.spec.p_node(k % self.spec.np))
    }
}

/// Samples `f` at every lattice node, parallel over rows of constant `q`.
pub fn sample(f: &Symbol, spec: &GridSpec) -> Result<PhaseGrid> {
    spec.validate()?;
    let plan = f.compile();
    let rows: Result<Vec<Vec<C64>>> = (0..spec.nq)
        .into_par_iter()
        .map(|iq| {
            let q = spec.q_node(iq);
            (0..spec.np).map(|ip| plan.evaluate(spec.p_node(ip), q)).collect()
        })
        .collect();
    Ok(PhaseGrid { spec: *spec, values: rows?.concat() })
}

/// Samples a pointwise function `(p, q) ↦ value`.
pub fn sample_fn(spec: &GridSpec, f: impl Fn(f64, f64) -> C64 + Sync) -> PhaseGrid {
    let values = (0..spec.nq)
        .into_par_iter()
        .flat_map_iter(|iq| {
            let q = spec.q_node(iq);
            (0..spec.np).map(move |ip| (ip, q))
        })
        .map(|(ip, q)| f(spec.p_node(ip), q))
        .collect();
    PhaseGrid { spec: *spec, values }
}

/// `sup |g1 − g2|`.
pub fn grid_distance(g1: &PhaseGrid, g2: &PhaseGrid) -> Result<f64> {
    if g1.spec != g2.spec {
        return Err(Error::GridMismatch);
    }
    Ok(g1.values.iter().zip(&g2.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// Trapezoid rule for `∬ g dq dp`.
pub fn integrate(g: &PhaseGrid) -> C64 {
    let s = g.spec;
    let weight = |i: usize, n: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
    let mut acc = ZERO;
    for iq in 0..s.nq {
        let mut row = ZERO;
        for ip in 0..s.np {
            row += g.get(iq, ip) * weight(ip, s.np);
        }
        acc += row * weight(iq, s.nq);
    }
    acc * s.dq() * s.dp()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Tensor Gauss–Legendre rule on `[a, b]²`: `(p, q, weight)` triples.
pub fn gauss_legendre_2d(a: f64, b: f64, n: usize) -> Vec<(f64, f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push((mid + half * x[j], mid + half * x[i], half * half * w[i] * w[j]));
        }
    }
    out
}

/// Samples `Σ_{n ≤ N} (1/n!)(f ∂←ᵀB∂→)ⁿ g` order by order.
///
/// Fails with [`Error::Divergence`] when the last retained order exceeds
/// `1e-8` of the partial sum on the grid.
pub fn star_series_oracle(f: &Symbol, g: &Symbol, star: &BilinearStar, order: u32, spec: &GridSpec) -> Result<PhaseGrid> {
    if order > 40 {
        return Err(Error::InvalidArgument("series order must not exceed 40".into()));
    }
    let (mut left, mut right) = (DerivCache::new(f), DerivCache::new(g));
    let mut sum = PhaseGrid::zeros(*spec);
    let mut last = 0.0;
    for n in 0..=order {
        let mut raw = Vec::new();
        series_order(&mut left, &mut right, &star.matrix(), n, &mut raw);
        let term = sample(&Symbol::normalize(raw)?, spec)?;
        last = term.sup_norm();
        for (s, t) in sum.values.iter_mut().zip(&term.values) {
            *s += t;
        }
    }
    let partial = sum.sup_norm();
    if last > 1e-8 * partial {
        return Err(Error::Divergence { last, partial });
    }
    Ok(sum)
}

/// Right-hand sides available to the grid integrator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridRhs {
    Zero,
    /// `−(p/m)∂qρ + (mω²q + 2γp)∂pρ`.
    Damped,
    /// `−(p/m)∂qρ + mω²q ∂pρ + iγħ ∂p∂qρ`.
    Naive,
}

fn d1(f: &[C64], i: usize, stride: usize, n: usize, h: f64) -> C64 {
    let at = |k: usize| f[k * stride];
    let v = if i >= 2 && i + 2 < n {
        -at(i + 2) + at(i + 1) * 8.0 - at(i - 1) * 8.0 + at(i - 2)
    } else if i == 0 {
        at(0) * -25.0 + at(1) * 48.0 - at(2) * 36.0 + at(3) * 16.0 - at(4) * 3.0
    } else if i == 1 {
        at(0) * -3.0 - at(1) * 10.0 + at(2) * 18.0 - at(3) * 6.0 + at(4)
    } else if i + 2 == n {
        -(at(n - 1) * -3.0 - at(n - 2) * 10.0 + at(n - 3) * 18.0 - at(n - 4) * 6.0 + at(n - 5))
    } else {
        -(at(n - 1) * -25.0 + at(n - 2) * 48.0 - at(n - 3) * 36.0 + at(n - 4) * 16.0 - at(n - 5) * 3.0)
    };
    v / (12.0 * h)
}

/// `(∂qρ, ∂pρ)` with fourth-order five-point stencils.
fn gradient(values: &[C64], spec: &GridSpec) -> (Vec<C64>, Vec<C64>) {
    let (nq, np) = (spec.nq, spec.np);
    let (dq, dp) = (spec.dq(), spec.dp());
    let rows: Vec<(Vec<C64>, Vec<C64>)> = (0..nq)
        .into_par_iter()
        .map(|iq| {
            let gq = (0..np).map(|ip| d1(&values[ip..], iq, np, nq, dq)).collect();
            let gp = (0..np).map(|ip| d1(&values[iq * np..], ip, 1, np, dp)).collect();
            (gq, gp)
        })
        .collect();
    let (gq, gp): (Vec<Vec<C64>>, Vec<Vec<C64>>) = rows.into_iter().unzip();
    (gq.concat(), gp.concat())
}

fn evaluate_rhs(values: &[C64], spec: &GridSpec, rhs: GridRhs, params: &Params) -> Vec<C64> {
    if rhs == GridRhs::Zero {
        return vec![ZERO; values.len()];
    }
    let (gq, gp) = gradient(values, spec);
    let mixed = if rhs == GridRhs::Naive { Some(gradient(&gq, spec).1) } else { None };
    let (nq, np) = (spec.nq, spec.np);
    let drag = if rhs == GridRhs::Damped { 2.0 * params.gamma } else { 0.0 };
    let k2 = params.m * params.omega * params.omega;
    (0..values.len())
        .into_par_iter()
        .map(|k| {
            let (iq, ip) = (k / np, k % np);
            let (q, p) = (spec.q_node(iq), spec.p_node(ip));
            let (vq, vp) = (p / params.m, -(k2 * q + drag * p));
            // Inflow boundary nodes carry no information from inside the
            // domain; they keep their initial value.
            let inflow = (iq == 0 && vq > 0.0)
                || (iq + 1 == nq && vq < 0.0)
                || (ip == 0 && vp > 0.0)
                || (ip + 1 == np && vp < 0.0);
            if inflow {
                return ZERO;
            }
            let mut v = gq[k] * -vq + gp[k] * -vp;
            if let Some(m) = &mixed {
                v += m[k] * C64::new(0.0, params.gamma * params.hbar);
            }
            v
        })
        .collect()
}

/// Largest `dt · |velocity| / min spacing` for the advection part.
pub fn cfl_number(spec: &GridSpec, dt: f64, params: &Params) -> f64 {
    let qmax = spec.q_min.abs().max(spec.q_max.abs());
    let pmax = spec.p_min.abs().max(spec.p_max.abs());
    let vq = pmax / params.m;
    let vp = params.m * params.omega * params.omega * qmax + 2.0 * params.gamma * pmax;
    dt * vq.hypot(vp) / spec.dq().min(spec.dp())
}

/// Classical RK4 stepping of `∂tρ = rhs(ρ)` up to time `t`.
///
/// The step is shrunk to divide `t` evenly. Fails with [`Error::Cfl`] if the
/// CFL number exceeds 0.5.
pub fn rk4_evolve(g0: &PhaseGrid, rhs: GridRhs, t: f64, dt: f64, params: &Params) -> Result<PhaseGrid> {
    if dt.is_nan() || dt <= 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument("dt must be positive and t finite".into()));
    }
    let spec = g0.spec;
    let steps = (t.abs() / dt).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let cfl = cfl_number(&spec, h.abs(), params);
    if rhs != GridRhs::Zero && cfl > 0.5 {
        return Err(Error::Cfl(cfl));
    }
    let axpy = |y: &[C64], k: &[C64], a: f64| -> Vec<C64> { y.iter().zip(k).map(|(y, k)| y + k * a).collect() };
    let mut y = g0.values.clone();
    for _ in 0..steps {
        let k1 = evaluate_rhs(&y, &spec, rhs, params);
        let k2 = evaluate_rhs(&axpy(&y, &k1, 0.5 * h), &spec, rhs, params);
        let k3 = evaluate_rhs(&axpy(&y, &k2, 0.5 * h), &spec, rhs, params);
        let k4 = evaluate_rhs(&axpy(&y, &k3, h), &spec, rhs, params);
        for i in 0..y.len() {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    Ok(PhaseGrid { spec, values: y })
}

/// Export formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    spec: GridSpec,
    values: Vec<[f64; 2]>,
}

/// Serializes a grid to a string in the given format.
pub fn render(g: &PhaseGrid, format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut out = String::from("q,p,re,im\n");
            for iq in 0..g.spec.nq {
                for ip in 0..g.spec.np {
                    let v = g.get(iq, ip);
                    let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", g.spec.q_node(iq), g.spec.p_node(ip), v.re, v.im);
                }
            }
            Ok(out)
        }
        Format::Json => {
            let file = GridFile { spec: g.spec, values: g.values.iter().map(|v| [v.re, v.im]).collect() };
            serde_json::to_string(&file).map_err(|e| Error::Format(e.to_string()))
        }
    }
}

pub fn export(g: &PhaseGrid, format: Format, path: &Path) -> Result<()> {
    let text = render(g, format)?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Parses the output of [`render`].
pub fn parse_grid(text: &str, format: Format) -> Result<PhaseGrid> {
    match format {
        Format::Json => {
            let file: GridFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
            PhaseGrid::new(file.spec, file.values.iter().map(|v| C64::new(v[0], v[1])).collect())
        }
        Format::Csv => {
            let mut lines = text.lines();
            if lines.next() != Some("q,p,re,im") {
                return Err(Error::Format("missing CSV header".into()));
            }
            let mut qs: Vec<f64> = Vec::new();
            let mut ps: Vec<f64> = Vec::new();
            let mut values = Vec::new();
            for line in lines.filter(|l| !l.is_empty()) {
                let fields: Vec<f64> = line
                    .split(',')
                    .map(|f| f.parse::<f64>().map_err(|_| Error::Format(format!("bad field in '{line}'"))))
                    .collect::<Result<_>>()?;
                if fields.len() != 4 {
                    return Err(Error::Format(format!("expected 4 fields in '{line}'")));
                }
                if qs.last() != Some(&fields[0]) {
                    qs.push(fields[0]);
                }
                if qs.len() == 1 {
                    ps.push(fields[1]);
                }
                values.push(C64::new(fields[2], fields[3]));
            }
            if qs.len() < 2 || ps.len() < 2 {
                return Err(Error::Format("grid needs at least two nodes per axis".into()));
            }
            let spec = GridSpec::new(qs[0], qs[qs.len() - 1], ps[0], ps[ps.len() - 1], qs.len(), ps.len())?;
            PhaseGrid::new(spec, values)
        }
    }
}

pub fn import(path: &Path, format: Format) -> Result<PhaseGrid> {
    parse_grid(&std::fs::read_to_string(path)?, format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::{sho_wigner_eigenstate, undamped_propagator};
    use crate::symbols::parse;

    #[test]
    fn constant_samples() {
        let spec = GridSpec::square(1.0, 3);
        assert_eq!(sample(&Symbol::zero(), &spec).unwrap().sup_norm(), 0.0);
        let ones = sample(&Symbol::one(), &spec).unwrap();
        assert_eq!(ones.values, vec![C64::new(1.0, 0.0); 9]);
    }

    #[test]
    fn ground_state_integral() {
        let p = Params::default();
        let g = sample(&sho_wigner_eigenstate(0, &p), &GridSpec::large()).unwrap();
        let total = integrate(&g);
        assert!((total.re - 2.0 * std::f64::consts::PI).abs() < 1e-4);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m12: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((m12 - 2.0 / 13.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(60);
        let g: f64 = x.iter().zip(&w).map(|(x, w)| w * (4.0 * x).cos()).sum();
        assert!((g - 2.0 * 4.0f64.sin() / 4.0).abs() < 1e-14);
    }

    #[test]
    fn distance_checks_spec() {
        let a = PhaseGrid::zeros(GridSpec::square(1.0, 3));
        let b = PhaseGrid::zeros(GridSpec::square(1.0, 4));
        assert_eq!(grid_distance(&a, &a).unwrap(), 0.0);
        assert!(matches!(grid_distance(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn oracle_on_polynomials_matches_exact_product() {
        let p = Params::default();
        let star = BilinearStar::damped(0.2, p);
        let f = parse("q^2*p - 3*p^3").unwrap();
        let g = parse("q*p^2 + q^3").unwrap();
        let spec = GridSpec::verification();
        let exact = sample(&crate::star::star_product(&f, &g, &star).unwrap(), &spec).unwrap();
        let oracle = star_series_oracle(&f, &g, &star, 6, &spec).unwrap();
        assert!(grid_distance(&exact, &oracle).unwrap() < 1e-10);
    }

    #[test]
    fn oracle_on_propagator_unitarity() {
        let p = Params::default();
        let u = undamped_propagator(0.3, &p).unwrap();
        let spec = GridSpec::verification();
        let g = star_series_oracle(&u.conjugate(), &u, &BilinearStar::moyal(p), 30, &spec).unwrap();
        let ones = sample(&Symbol::one(), &spec).unwrap();
        assert!(grid_distance(&g, &ones).unwrap() < 1e-7);
    }

    #[test]
    fn zero_rhs_keeps_grid() {
        let p = Params::default();
        let g0 = sample(&sho_wigner_eigenstate(0, &p), &GridSpec::square(3.0, 21)).unwrap();
        let g = rk4_evolve(&g0, GridRhs::Zero, 1.0, 0.1, &p).unwrap();
        assert_eq!(g, g0);
    }

    #[test]
    fn stencils_are_fourth_order() {
        // Exact on quartic polynomials, including the boundary rows.
        let spec = GridSpec::square(1.0, 11);
        let g = sample_fn(&spec, |p, q| C64::new(q.powi(4) - 2.0 * q * p.powi(3), 0.0));
        let (gq, gp) = gradient(&g.values, &spec);
        for k in 0..spec.len() {
            let (q, p) = (spec.q_node(k / spec.np), spec.p_node(k % spec.np));
            assert!((gq[k].re - (4.0 * q.powi(3) - 2.0 * p.powi(3))).abs() < 1e-11);
            assert!((gp[k].re - (-6.0 * q * p * p)).abs() < 1e-11);
        }
    }

    #[test]
    fn undamped_rotation_returns_after_one_period() {
        let p = Params::default();
        let spec = GridSpec::large();
        let g0 = sample(&parse("exp(-(q-1.5)^2 - p^2)").unwrap(), &spec).unwrap();
        let g = rk4_evolve(&g0, GridRhs::Damped, 2.0 * std::f64::consts::PI, 2e-3, &p).unwrap();
        assert!(grid_distance(&g, &g0).unwrap() < 1e-3);
    }

    #[test]
    fn naive_grid_evolution_loses_reality() {
        let p = Params::new(1.0, 1.0, 1.0, 0.1).unwrap();
        let spec = GridSpec::square(6.0, 81);
        let g0 = sample(&sho_wigner_eigenstate(0, &p), &spec).unwrap();
        let a = rk4_evolve(&g0, GridRhs::Naive, 0.1, 5e-3, &p).unwrap().imaginary_sup();
        let b = rk4_evolve(&g0, GridRhs::Naive, 0.2, 5e-3, &p).unwrap().imaginary_sup();
        assert!(a > 1e-3 && b > a);
        let d = rk4_evolve(&g0, GridRhs::Damped, 0.2, 5e-3, &p).unwrap().imaginary_sup();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let p = Params::default();
        let g0 = PhaseGrid::zeros(GridSpec::large());
        assert!(matches!(rk4_evolve(&g0, GridRhs::Damped, 1.0, 0.1, &p), Err(Error::Cfl(_))));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let p = Params::default().with_gamma(0.1);
        let rho = crate::oscillator::damped_eigenstate(1, &p).unwrap().0;
        let g = sample(&rho, &GridSpec::new(-2.0, 2.5, -1.0, 3.0, 7, 5).unwrap()).unwrap();
        for format in [Format::Csv, Format::Json] {
            let text = render(&g, format).unwrap();
            assert_eq!(text, render(&g, format).unwrap());
            let back = parse_grid(&text, format).unwrap();
            assert_eq!(back.values, g.values);
        }
        let csv = render(&PhaseGrid::zeros(GridSpec::square(1.0, 2)), Format::Csv).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("q,p,re,im\n"));
    }
}
