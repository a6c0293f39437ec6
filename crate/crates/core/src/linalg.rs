//! Small dense and banded linear-algebra helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Least-squares solution of `a·x ≈ b` through the SVD, with singular
/// values below `1e-12·σ_max` treated as zero.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() < a.ncols() {
        return Err(Error::InsufficientData(format!(
            "least squares with {} rows and {} unknowns",
            a.nrows(),
            a.ncols()
        )));
    }
    let svd = a.clone().svd(true, true);
    let tol = 1e-12 * svd.singular_values.max();
    svd.solve(b, tol).map_err(|e| Error::Numeric(format!("least squares failed: {e}")))
}

/// Fits `y ≈ Σ_j c_j·basis_j(n)` over the index range and returns `c`.
pub fn fit_columns(ns: &[usize], y: &[f64], basis: &[&dyn Fn(usize) -> f64]) -> Result<Vec<f64>> {
    let a = DMatrix::from_fn(ns.len(), basis.len(), |i, j| basis[j](ns[i]));
    let b = DVector::from_column_slice(y);
    Ok(lstsq(&a, &b)?.iter().copied().collect())
}

/// Weighted variant of [`fit_columns`]: row `i` is scaled by `w[i]`.
pub fn fit_columns_weighted(
    ns: &[usize],
    y: &[f64],
    w: &[f64],
    basis: &[&dyn Fn(usize) -> f64],
) -> Result<Vec<f64>> {
    let a = DMatrix::from_fn(ns.len(), basis.len(), |i, j| w[i] * basis[j](ns[i]));
    let b = DVector::from_iterator(y.len(), y.iter().zip(w).map(|(y, w)| y * w));
    Ok(lstsq(&a, &b)?.iter().copied().collect())
}

/// Banded matrix with `kl` sub-diagonals and `ku` super-diagonals, and
/// its LU factorization with partial pivoting.
///
/// Row swaps let fill reach `kl + ku` columns right of the diagonal, so
/// rows are stored for columns `i−kl ..= i+kl+ku`. Multipliers stay in the
/// rows where they were produced and the swaps are replayed in `solve`.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![0.0; n * (2 * kl + ku + 1)], piv: Vec::new() }
    }

    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.kl + self.ku {
            None
        } else {
            Some(i * self.width() + (j + self.kl - i))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.data[k])
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j).expect("inside the stored band");
        self.data[k] = v;
    }

    /// Adds `v` at `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if j + self.kl < i || j > i + self.ku {
            panic!("({i}, {j}) lies outside the band");
        }
        let k = self.idx(i, j).expect("inside the stored band");
        self.data[k] += v;
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `y = A·x` (before factorization).
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn factor(mut self) -> Result<Self> {
        let n = self.n;
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let p = (k..=last).max_by(|&a, &b| self.get(a, k).abs().total_cmp(&self.get(b, k).abs())).unwrap_or(k);
            let pv = self.get(p, k);
            if !(pv.abs() > 0.0) || !pv.is_finite() {
                return Err(Error::Numeric(format!("singular banded system at column {k}")));
            }
            let right = (k + self.kl + self.ku).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (a, b) = (self.get(k, j), self.get(p, j));
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
            }
            piv.push(p);
            for i in k + 1..=last {
                let f = self.get(i, k) / pv;
                if f == 0.0 {
                    continue;
                }
                self.set(i, k, f);
                for j in k + 1..=right {
                    let kj = self.get(k, j);
                    if kj != 0.0 {
                        let v = self.get(i, j) - f * kj;
                        self.set(i, j, v);
                    }
                }
            }
        }
        self.piv = piv;
        Ok(self)
    }

    /// Solves with a factored matrix.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    x[i] -= self.get(i, k) * xk;
                }
            }
        }
        for i in (0..n).rev() {
            let hi = (i + self.kl + self.ku).min(n - 1);
            let s: f64 = (i + 1..=hi).map(|j| self.get(i, j) * x[j]).sum();
            x[i] = (x[i] - s) / self.get(i, i);
        }
        x
    }
}

/// Ritz values of the operator `apply` from `m` steps of Arnoldi with full
/// reorthogonalization, started from `v0`. Returns the Hessenberg
/// eigenvalues and, for each, the residual norm estimate `|h_{m+1,m}·e_mᵀy|`.
pub fn arnoldi(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    v0: &[f64],
    m: usize,
) -> Result<Vec<(num_complex::Complex64, f64)>> {
    let n = v0.len();
    let m = m.min(n);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let n0 = norm(v0);
    if n0 == 0.0 {
        return Err(Error::Numeric("zero Arnoldi start vector".into()));
    }
    basis.push(v0.iter().map(|x| x / n0).collect());
    let mut h = DMatrix::<f64>::zeros(m + 1, m);
    let mut steps = m;
    for j in 0..m {
        let mut w = apply(&basis[j]);
        for _pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
                h[(i, j)] += c;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= c * vk;
                }
            }
        }
        let nw = norm(&w);
        h[(j + 1, j)] = nw;
        if nw <= 1e-14 * h.column(j).norm() {
            steps = j + 1;
            break;
        }
        basis.push(w.iter().map(|x| x / nw).collect());
    }
    let hm = h.view((0, 0), (steps, steps)).into_owned();
    let tail = h[(steps, steps - 1)];
    let eig = hm.clone().complex_eigenvalues();
    let hc = hm.map(|x| num_complex::Complex64::new(x, 0.0));
    let mut out = Vec::with_capacity(steps);
    for &theta in eig.iter() {
        // Last component of the unit eigenvector by inverse iteration.
        let shifted = &hc - DMatrix::<num_complex::Complex64>::identity(steps, steps) * theta;
        let pert = num_complex::Complex64::new(1e-13 * (1.0 + theta.norm()), 0.0);
        let lu = (shifted + DMatrix::identity(steps, steps) * pert).lu();
        let mut y = nalgebra::DVector::from_element(steps, num_complex::Complex64::new(1.0, 0.0));
        for _ in 0..3 {
            y = lu.solve(&y).unwrap_or(y);
            let ny = y.norm();
            if ny > 0.0 && ny.is_finite() {
                y /= num_complex::Complex64::new(ny, 0.0);
            }
        }
        out.push((theta, tail.abs() * y[steps - 1].norm()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_recovers_exact_line() {
        let ns: Vec<usize> = (1..20).collect();
        let y: Vec<f64> = ns.iter().map(|&n| 2.0 - 3.0 / n as f64).collect();
        let c = fit_columns(&ns, &y, &[&|_| 1.0, &|n| 1.0 / n as f64]).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-13 && (c[1] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn banded_solve_matches_dense() {
        let n = 12;
        let mut a = BandedLu::new(n, 3, 2);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(3)..=(i + 2).min(n - 1) {
                // Small diagonal in some rows forces row exchanges.
                let v = if i == j { if i % 3 == 0 { 1e-3 } else { 10.0 } } else { 1.0 + ((i * 7 + j * 3) % 5) as f64 };
                a.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = a.factor().unwrap().solve(&b);
        let r = &dense * DVector::from_column_slice(&x) - DVector::from_column_slice(&b);
        assert!(r.norm() < 1e-13);
    }

    #[test]
    fn arnoldi_finds_extreme_eigenvalues() {
        let d: Vec<f64> = (1..=200).map(|k| 1.0 / k as f64).collect();
        let v0: Vec<f64> = (0..200).map(|k| 1.0 + (k as f64 * 0.37).sin()).collect();
        let ritz = arnoldi(|x| x.iter().zip(&d).map(|(a, b)| a * b).collect(), &v0, 60).unwrap();
        let best = ritz.iter().map(|r| r.0.re).fold(0.0, f64::max);
        assert!((best - 1.0).abs() < 1e-12);
        let conv = ritz.iter().find(|r| (r.0.re - 1.0).abs() < 1e-10).unwrap();
        assert!(conv.1 < 1e-8);
    }
}
