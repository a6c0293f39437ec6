//! Zeros `z_n` of `c₂(z²)` and the Riesz basis `{sin z_n t}` on `(0, l)`.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::seq::CoeffSeq;

/// Sub-intervals scanned for sign changes inside each `I_n`.
const SCAN: usize = 64;

/// `c₂(z²) = d cos zl + (1 − d²z²) sin(zl)/z` for real `z > 0`.
pub fn c2_real(z: f64, geom: &Geometry) -> f64 {
    let (d, l) = (geom.d, geom.l);
    let (s, c) = (z * l).sin_cos();
    d * c + (1.0 - d * d * z * z) * s / z
}

/// `d/dz c₂(z²)`.
fn c2_real_dz(z: f64, geom: &Geometry) -> f64 {
    let (d, l) = (geom.d, geom.l);
    let (s, c) = (z * l).sin_cos();
    -d * l * s - 2.0 * d * d * s + (1.0 - d * d * z * z) * (l * z * c - s) / (z * z)
}

#[derive(Clone, Debug)]
pub struct BasisZeros {
    pub z: Vec<f64>,
    pub residuals: Vec<f64>,
    pub geometry: Geometry,
    /// Intervals where more than one sign change was seen.
    pub diagnostics: Vec<String>,
}

/// `z·c₂(z²)` has the zeros of `c₂` on `z > 0` and no poles, so it is
/// bracketed directly; this is equivalent to bisecting
/// `dz/(d²z²−1) − tan zl` between its poles.
fn zero_in_interval(n: usize, geom: &Geometry) -> Result<(f64, bool)> {
    let l = geom.l;
    let (lo, hi) = (PI * (n as f64 - 0.5) / l, PI * (n as f64 + 0.5) / l);
    let f = |z: f64| z * c2_real(z, geom);
    let pts: Vec<f64> = (0..=SCAN).map(|k| lo + (hi - lo) * k as f64 / SCAN as f64).collect();
    let vals: Vec<f64> = pts.iter().map(|&z| f(z)).collect();
    let changes: Vec<usize> =
        (0..SCAN).filter(|&k| vals[k] == 0.0 || vals[k] * vals[k + 1] < 0.0).collect();
    let Some(&k) = changes.first() else {
        return Err(Error::Search { n, detail: format!("no sign change of c2 in ({lo}, {hi})") });
    };
    let (mut a, mut b, mut fa) = (pts[k], pts[k + 1], vals[k]);
    if fa == 0.0 {
        return Ok((a, changes.len() > 1));
    }
    while b - a > 4.0 * f64::EPSILON * b {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok((m, changes.len() > 1));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    // Newton polish on c₂ itself.
    let mut z = 0.5 * (a + b);
    for _ in 0..3 {
        let step = c2_real(z, geom) / c2_real_dz(z, geom);
        if !step.is_finite() || step.abs() > (b - a).max(1e-14 * z) {
            break;
        }
        z -= step;
    }
    Ok((z, changes.len() > 1))
}

/// One zero of `c₂(z²)` in each `I_n = (πn/l − π/(2l), πn/l + π/(2l))`,
/// the lowest when several exist.
pub fn compute_z(geom: &Geometry, n: usize) -> Result<BasisZeros> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let found: Vec<(f64, bool)> = (1..=n).into_par_iter().map(|k| zero_in_interval(k, geom)).collect::<Result<_>>()?;
    let z: Vec<f64> = found.iter().map(|f| f.0).collect();
    let residuals = z.iter().map(|&x| c2_real(x, geom).abs()).collect();
    let diagnostics = found
        .iter()
        .enumerate()
        .filter(|(_, f)| f.1)
        .map(|(k, _)| format!("I_{} holds several zeros; the lowest was taken", k + 1))
        .collect();
    Ok(BasisZeros { z, residuals, geometry: geom.clone(), diagnostics })
}

/// Factored Gram matrix of `{sin z_n t}` on `(0, l)`.
#[derive(Clone, Debug)]
pub struct GramSystem {
    pub g: DMatrix<f64>,
    pub cond: f64,
    chol: Cholesky<f64, Dyn>,
}

/// Maximum accepted condition number.
pub const MAX_COND: f64 = 1e8;

/// `∫₀^l sin(xt) sin(yt) dt` in closed form.
pub fn sine_inner(x: f64, y: f64, l: f64) -> f64 {
    if x == y {
        l / 2.0 - (2.0 * x * l).sin() / (4.0 * x)
    } else {
        ((x - y) * l).sin() / (2.0 * (x - y)) - ((x + y) * l).sin() / (2.0 * (x + y))
    }
}

pub fn gram_matrix(z: &BasisZeros) -> Result<GramSystem> {
    let l = z.geometry.l;
    let n = z.z.len();
    for w in z.z.windows(2) {
        if (w[1] - w[0]).abs() < 1e-8 {
            return Err(Error::DegenerateBasis(format!("z values {} and {} nearly coincide", w[0], w[1])));
        }
    }
    let g = DMatrix::from_fn(n, n, |i, j| sine_inner(z.z[i], z.z[j], l));
    let eig = g.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    if !(lo > 0.0) {
        return Err(Error::DegenerateBasis(format!("Gram matrix is not positive definite (λ_min = {lo:e})")));
    }
    let cond = hi / lo;
    if cond > MAX_COND {
        return Err(Error::Conditioning { cond });
    }
    let chol = Cholesky::new(g.clone())
        .ok_or_else(|| Error::DegenerateBasis("Cholesky factorization failed".into()))?;
    Ok(GramSystem { g, cond, chol })
}

impl GramSystem {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.chol.solve(&DVector::from_column_slice(rhs)).iter().copied().collect()
    }
}

/// The function on `(0, l)` whose moments against `sin z_n t` are `xi`,
/// restricted to the span of the first `N` basis functions, sampled at
/// `grid`.
pub fn expand_biorthogonal(xi: &CoeffSeq, z: &BasisZeros, gram: &GramSystem, grid: &[f64]) -> Result<Vec<f64>> {
    let n = gram.g.nrows();
    if xi.len() < n || z.z.len() < n {
        return Err(Error::InsufficientData(format!(
            "need {n} coefficients and zeros, got {} and {}",
            xi.len(),
            z.z.len()
        )));
    }
    let c = gram.solve(&xi.re()[..n]);
    Ok(grid.iter().map(|&t| c.iter().zip(&z.z).map(|(c, z)| c * (z * t).sin()).sum()).collect())
}
