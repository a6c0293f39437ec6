//! Finite-difference discretization of the boundary value problem, used as
//! an independent check on the forward solver.
//!
//! Unknowns are `y(ih)`, `i = 1..P` on `[0, γ]` (the last one is `y(γ)`)
//! and `y(a + jh)`, `j = 1..Q−1` on `[a, b]`; the Dirichlet values are
//! dropped. The first jump condition `y(a) = y(γ) + d y′(γ)` eliminates
//! `y(a)`, and the second one, affine in `λ`, closes the system as the row
//! of `y(γ)`. Derivatives at `γ` and `a` use one-sided second-order
//! differences. The pencil `A − λB` has `B = I` apart from that row.
//!
//! `A` is banded except for the column of `y(γ)` fed by the frozen term
//! `q(x)y(γ)`. Eigenvalues nearest a shift come from Arnoldi on
//! `(A − σB)⁻¹B`, applied through a banded LU and a Sherman–Morrison
//! correction for that column.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::Spectrum;
use crate::geometry::{Geometry, Potential};
use crate::linalg::{arnoldi, BandedLu};

/// Uniform mesh on both segments.
#[derive(Clone, Debug, PartialEq)]
pub struct FdMesh {
    pub h: f64,
    /// Steps on `[0, γ]`.
    pub p: usize,
    /// Steps on `[a, b]`.
    pub q: usize,
}

impl FdMesh {
    pub fn new(geom: &Geometry, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Domain(format!("mesh step must be positive, got {h}")));
        }
        let steps = |len: f64, name: &str| {
            let k = (len / h).round();
            if (k * h - len).abs() > 1e-9 * len || k < 4.0 {
                Err(Error::Domain(format!("h = {h} does not divide {name} = {len} into at least 4 steps")))
            } else {
                Ok(k as usize)
            }
        };
        Ok(Self { h, p: steps(geom.gamma, "γ")?, q: steps(geom.l, "l")? })
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.p + self.q - 1
    }

    /// Index of `y(γ)`.
    fn gamma_index(&self) -> usize {
        self.p - 1
    }
}

/// The discretized pencil: `A = band + column·e_γᵀ`, and `B` equal to the
/// identity except for row `γ`, which is `b_row`.
struct Pencil {
    band: BandedLu,
    column: Vec<f64>,
    b_row: Vec<(usize, f64)>,
    g: usize,
}

const KL: usize = 3;
const KU: usize = 2;

fn assemble(q: &Potential, geom: &Geometry, mesh: &FdMesh) -> Result<Pencil> {
    let (h, d) = (mesh.h, geom.d);
    let n = mesh.dim();
    let g = mesh.gamma_index();
    let h2 = 1.0 / (h * h);
    let mut band = BandedLu::new(n, KL, KU);
    let mut column = vec![0.0; n];
    let put = |band: &mut BandedLu, column: &mut Vec<f64>, i: usize, j: usize, v: f64| {
        if j + KL >= i && j <= i + KU {
            band.add(i, j, v);
        } else if j == g {
            column[i] += v;
        } else {
            unreachable!("({i}, {j}) is outside the pencil's structure");
        }
    };
    // y′(γ) and y(a) = y(γ) + d·y′(γ) as combinations of unknowns; y(0) = 0
    // drops out when P is small.
    let dy_gamma: Vec<(usize, f64)> = [(g, 1.5 / h), (g.wrapping_sub(1), -2.0 / h), (g.wrapping_sub(2), 0.5 / h)]
        .into_iter()
        .filter(|&(j, _)| j < n)
        .collect();
    let y_a: Vec<(usize, f64)> =
        dy_gamma.iter().map(|&(j, c)| (j, d * c + if j == g { 1.0 } else { 0.0 })).collect();
    let right = |j: usize| g + j;

    for i in 1..mesh.p {
        let row = i - 1;
        if i > 1 {
            put(&mut band, &mut column, row, row - 1, -h2);
        }
        put(&mut band, &mut column, row, row, 2.0 * h2);
        put(&mut band, &mut column, row, row + 1, -h2);
        put(&mut band, &mut column, row, g, q.left.eval(i as f64 * h));
    }
    for j in 1..mesh.q {
        let row = right(j);
        if j == 1 {
            for &(c, v) in &y_a {
                put(&mut band, &mut column, row, c, -h2 * v);
            }
        } else {
            put(&mut band, &mut column, row, right(j - 1), -h2);
        }
        put(&mut band, &mut column, row, row, 2.0 * h2);
        if j + 1 < mesh.q {
            put(&mut band, &mut column, row, right(j + 1), -h2);
        }
        put(&mut band, &mut column, row, g, q.right.eval(geom.a() + j as f64 * h));
    }
    // y′(a) − d q(γ) y(γ) − y′(γ) = λ(−d y(γ) − d² y′(γ)), with
    // y′(a) = (−3y(a) + 4y(a+h) − y(a+2h))/(2h).
    for &(c, v) in &y_a {
        put(&mut band, &mut column, g, c, -1.5 / h * v);
    }
    put(&mut band, &mut column, g, right(1), 2.0 / h);
    if mesh.q > 2 {
        put(&mut band, &mut column, g, right(2), -0.5 / h);
    }
    put(&mut band, &mut column, g, g, -d * q.q_at_gamma);
    for &(c, v) in &dy_gamma {
        put(&mut band, &mut column, g, c, -v);
    }
    let mut b_row: Vec<(usize, f64)> = dy_gamma.iter().map(|&(c, v)| (c, -d * d * v)).collect();
    b_row.iter_mut().find(|(c, _)| *c == g).expect("y(γ) is in its own row").1 -= d;
    let diag = b_row.iter().find(|(c, _)| *c == g).map_or(0.0, |x| x.1);
    if diag.abs() < 1e-12 * (1.0 + d * d / h) {
        return Err(Error::Domain("the λ-dependent closure row of B is singular".into()));
    }
    Ok(Pencil { band, column, b_row, g })
}

/// `x ↦ (A − σB)⁻¹Bx`.
struct ShiftInvert {
    lu: BandedLu,
    /// `M⁻¹u` for the off-band column `u`, and `1 + e_γᵀM⁻¹u`.
    mu: Vec<f64>,
    denom: f64,
    b_row: Vec<(usize, f64)>,
    g: usize,
}

impl ShiftInvert {
    fn new(p: Pencil, sigma: f64) -> Result<Self> {
        let mut band = p.band;
        for i in 0..band.len() {
            if i != p.g {
                band.add(i, i, -sigma);
            }
        }
        for &(c, v) in &p.b_row {
            band.add(p.g, c, -sigma * v);
        }
        let lu = band.factor()?;
        let mu = lu.solve(&p.column);
        let denom = 1.0 + mu[p.g];
        if denom.abs() < 1e-14 {
            return Err(Error::Numeric("shift-invert operator is singular at the chosen shift".into()));
        }
        Ok(Self { lu, mu, denom, b_row: p.b_row, g: p.g })
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut bx = x.to_vec();
        bx[self.g] = self.b_row.iter().map(|&(c, v)| v * x[c]).sum();
        let mut y = self.lu.solve(&bx);
        let f = y[self.g] / self.denom;
        for (yi, mi) in y.iter_mut().zip(&self.mu) {
            *yi -= f * mi;
        }
        y
    }
}

/// Shift of the spectral transformation; a small negative value keeps the
/// pencil regular at `λ = 0` and favours the eigenvalues of least modulus.
const SHIFT: f64 = -1e-3;

/// Relative Ritz residual accepted as converged.
const RITZ_TOL: f64 = 1e-9;

/// The `n` eigenvalues of smallest modulus of the finite-difference pencil.
pub fn fd_spectrum(q: &Potential, geom: &Geometry, h: f64, n: usize) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let mesh = FdMesh::new(geom, h)?;
    let dim = mesh.dim();
    if n > dim / 4 {
        return Err(Error::Domain(format!("{n} eigenvalues requested from a {dim}-node mesh")));
    }
    let op = ShiftInvert::new(assemble(q, geom, &mesh)?, SHIFT)?;
    let v0: Vec<f64> = (0..dim).map(|i| 1.0 + 0.5 * (0.37 * i as f64).sin()).collect();
    let mut m = (3 * n + 20).min(dim);
    loop {
        let ritz = arnoldi(|x| op.apply(x), &v0, m)?;
        let mut good: Vec<Complex64> = ritz
            .iter()
            .filter(|(t, r)| t.norm() > 0.0 && *r <= RITZ_TOL * t.norm())
            .map(|(t, _)| SHIFT + 1.0 / t)
            .collect();
        good.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(crate::forward::order(a, b)));
        // Converged values are only trusted up to the first unconverged one.
        let smallest_bad = ritz
            .iter()
            .filter(|(t, r)| t.norm() > 0.0 && *r > RITZ_TOL * t.norm())
            .map(|(t, _)| (SHIFT + 1.0 / t).norm())
            .fold(f64::INFINITY, f64::min);
        let ok: Vec<Complex64> = good.into_iter().filter(|v| v.norm() < smallest_bad).collect();
        if ok.len() >= n {
            let mut vals = ok[..n].to_vec();
            for v in &mut vals {
                if v.im.abs() <= 1e-12 * v.norm() {
                    v.im = 0.0;
                }
            }
            return Ok(Spectrum::computed(vals));
        }
        if m == dim {
            return Err(Error::Numeric(format!("Arnoldi resolved {} of {n} eigenvalues", ok.len())));
        }
        m = (2 * m).min(dim);
    }
}
