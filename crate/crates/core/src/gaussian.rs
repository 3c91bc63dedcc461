//! Closed-form action of `exp(½ ∂ᵀK∂)` on `exp(zᵀMz + βᵀz)`.
//!
//! Both the transition operators (2-D, `K = C`) and the Gaussian star
//! product (4-D over `(x, y)`, `K = [[0, B], [Bᵀ, 0]]`) reduce to this map.
//! With `S(τ) = I - 2τKM` and `W = S(1)⁻¹` the image is
//!
//! ```text
//! det S(1)^{-1/2} · exp(zᵀ M W z + βᵀ W z + ½ βᵀ W K β)
//! ```
//!
//! The square root is continued along `τ ∈ [0, 1]` from `det S(0) = 1`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub(crate) const SINGULAR_DET: f64 = 1e-12;

pub(crate) struct GaussImage {
    pub quad: DMatrix<C64>,
    pub linear: DVector<C64>,
    /// Constant added to the exponent.
    pub shift: C64,
    /// `det S(1)^{-1/2}` on the continued branch.
    pub prefactor: C64,
}

pub(crate) fn heat_image(m: &DMatrix<C64>, beta: &DVector<C64>, k: &DMatrix<C64>) -> Result<GaussImage> {
    let n = m.nrows();
    let identity = DMatrix::<C64>::identity(n, n);
    let km = k * m;
    let s = &identity - &km * C64::new(2.0, 0.0);
    let det = s.determinant();
    if det.norm().is_nan() || det.norm() < SINGULAR_DET {
        return Err(Error::SingularGaussian(det.norm()));
    }
    let w = s.try_inverse().ok_or(Error::SingularGaussian(det.norm()))?;
    let quad = m * &w;
    let quad = (&quad + quad.transpose()) * C64::new(0.5, 0.0);
    let linear = w.transpose() * beta;
    let shift = (beta.transpose() * &w * k * beta)[(0, 0)] * 0.5;
    let root = continued_sqrt(|tau| (&identity - &km * C64::new(2.0 * tau, 0.0)).determinant())?;
    Ok(GaussImage { quad, linear, shift, prefactor: root.inv() })
}

/// `sqrt(f(1))` on the branch continued from `sqrt(f(0)) = 1`.
pub(crate) fn continued_sqrt(f: impl Fn(f64) -> C64) -> Result<C64> {
    const STEPS: usize = 32;
    let mut arg = 0.0;
    let mut prev = f(0.0);
    for k in 1..=STEPS {
        let (a, b) = ((k - 1) as f64 / STEPS as f64, k as f64 / STEPS as f64);
        let (delta, next) = track(&f, a, b, prev, 0)?;
        arg += delta;
        prev = next;
    }
    Ok(C64::from_polar(prev.norm().sqrt(), 0.5 * arg))
}

fn track(f: &impl Fn(f64) -> C64, a: f64, b: f64, fa: C64, depth: u32) -> Result<(f64, C64)> {
    let fb = f(b);
    if fb.norm() < SINGULAR_DET {
        return Err(Error::BranchAmbiguity);
    }
    let delta = (fb / fa).arg();
    if delta.abs() < 0.5 {
        return Ok((delta, fb));
    }
    if depth > 40 {
        return Err(Error::BranchAmbiguity);
    }
    let mid = 0.5 * (a + b);
    let (d1, fm) = track(f, a, mid, fa, depth + 1)?;
    let (d2, fb) = track(f, mid, b, fm, depth + 1)?;
    Ok((d1 + d2, fb))
}

pub(crate) fn mat2(a: [[C64; 2]; 2]) -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
}
