//! The characteristic function rebuilt from its zeros.
//!
//! A raw canonical product converges far too slowly to be useful, so both
//! branches divide by a reference function with known zeros and multiply
//! the reference back in closed form:
//!
//! * `l = γ`: `Δ(λ) = d²(λ−λ₀)·sin(2ρl)/(2ρ)·Π_{n≥1} (λ_n−λ)/(m_n²−λ)` with
//!   `m_n = πn/(2l)`. Eigenvalues past the supplied ones are extended from
//!   a fit of the asymptotic law, and the far tail is summed analytically.
//! * general geometry: `Δ(λ) = Δ₀(λ)·Π (λ_n−λ)/(λ⁰_n−λ)`, where `Δ₀` is the
//!   characteristic function for `q ≡ 0` and `λ⁰_n` its zeros.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::{order, Characteristic, PotentialChar, Scaled};
use crate::geometry::{Geometry, Potential};
use crate::linalg::fit_columns;
use crate::roots::{self, RootOptions};
use crate::trig::{sinc_scaled, trigamma, Wave};

/// Renormalize a running product every this many factors.
const RENORM: usize = 32;

/// Minimum number of extended terms in the `l = γ` tail.
const MIN_TAIL: usize = 20_000;

#[derive(Clone, Debug)]
enum Kind {
    Lg {
        lambda0: Complex64,
        /// `λ_n`, n = 1..=K: supplied values, then the fitted extension.
        zeros: Vec<Complex64>,
        supplied: usize,
        /// `Σ_{n>K} 1/m_n²` and `Σ_{n>K} 1/m_n⁴`, times `2/(dl)`.
        far: (f64, f64),
    },
    General {
        base: PotentialChar,
        base_zeros: Vec<Complex64>,
        zeros: Vec<Complex64>,
        /// Fitted mean of `n·(λ_n − λ⁰_n)` over the last supplied fifth.
        shift: f64,
    },
}

/// Δ evaluated from a spectrum.
#[derive(Clone, Debug)]
pub struct ProductChar {
    geom: Geometry,
    kind: Kind,
}

fn by_modulus(values: &[Complex64]) -> Vec<Complex64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(order(a, b)));
    v
}

impl ProductChar {
    /// Builds the product with the default tail length.
    pub fn new(geom: &Geometry, values: &[Complex64]) -> Result<Self> {
        Self::with_tail(geom, values, None)
    }

    /// Builds the product; `tail` overrides the number of extended terms in
    /// the `l = γ` branch (for convergence checks).
    pub fn with_tail(geom: &Geometry, values: &[Complex64], tail: Option<usize>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "a product needs at least 2 eigenvalues, got {}",
                values.len()
            )));
        }
        let v = by_modulus(values);
        let kind = if geom.is_lg() { Self::lg(geom, &v, tail)? } else { Self::general(geom, &v)? };
        Ok(Self { geom: geom.clone(), kind })
    }

    /// Number of supplied eigenvalues used.
    pub fn supplied(&self) -> usize {
        match &self.kind {
            Kind::Lg { supplied, .. } => supplied + 1,
            Kind::General { zeros, .. } => zeros.len(),
        }
    }

    fn lg(geom: &Geometry, v: &[Complex64], tail: Option<usize>) -> Result<Kind> {
        let (l, d) = (geom.l, geom.d);
        let m = |n: usize| PI * n as f64 / (2.0 * l);
        let shift = 2.0 / (d * l);
        let supplied = v.len() - 1;
        growth_check(&v[1..], |n| m(n).powi(2))?;

        // y_n = n(λ_n − m_n² − 2/(dl)) ≈ a·δ_n + (b + c(−1)ⁿ + e·cos(πn/2) + f·δ_n)/n
        let start = (supplied * 4 / 5).max(1);
        let ns: Vec<usize> = (start..=supplied).collect();
        let y: Vec<f64> =
            ns.iter().map(|&n| n as f64 * (v[n].re - m(n).powi(2) - shift)).collect();
        let delta = |n: usize| [0.0, 1.0, 0.0, -1.0][n % 4];
        let inv = |n: usize| 1.0 / n as f64;
        let sign = |n: usize| if n % 2 == 0 { 1.0 } else { -1.0 };
        let cosq = |n: usize| [1.0, 0.0, -1.0, 0.0][n % 4];
        let coef: Vec<f64> = if ns.len() >= 12 {
            fit_columns(
                &ns,
                &y,
                &[
                    &delta,
                    &|n| inv(n),
                    &|n| sign(n) * inv(n),
                    &|n| cosq(n) * inv(n),
                    &|n| delta(n) * inv(n),
                ],
            )?
        } else {
            let mut c = fit_columns(&ns, &y, &[&delta]).unwrap_or_else(|_| vec![0.0]);
            c.resize(5, 0.0);
            c
        };
        let big = tail.unwrap_or_else(|| (16 * supplied).max(MIN_TAIL)).max(supplied);
        let mut zeros: Vec<Complex64> = v[1..].to_vec();
        for n in supplied + 1..=big {
            let yn = coef[0] * delta(n)
                + (coef[1] + coef[2] * sign(n) + coef[3] * cosq(n) + coef[4] * delta(n)) * inv(n);
            zeros.push(Complex64::new(m(n).powi(2) + shift + yn * inv(n), 0.0));
        }
        let k = big as f64;
        let s2 = (2.0 * l / PI).powi(2) * trigamma(k + 1.0);
        let s4 = (2.0 * l / PI).powi(4) * (1.0 / (3.0 * k.powi(3)) - 1.0 / (2.0 * k.powi(4)));
        Ok(Kind::Lg { lambda0: v[0], zeros, supplied, far: (shift * s2, shift * s4) })
    }

    fn general(geom: &Geometry, v: &[Complex64]) -> Result<Kind> {
        let len = geom.gamma + geom.l;
        let n = v.len();
        // Counting density: √|λ_n| grows like πn/(γ+l) for the admissible
        // type and like πn/(2γ) for the other one.
        if n >= 8 && (2.0 * geom.gamma - len).abs() > 1e-9 * len {
            let (i0, i1) = (n / 2, n - 1);
            let slope = (v[i1].norm().sqrt() - v[i0].norm().sqrt()) / (i1 - i0) as f64;
            let (good, bad) = (PI / len, PI / (2.0 * geom.gamma));
            if (slope - bad).abs() < (slope - good).abs() {
                return Err(Error::Reconstruction(format!(
                    "counting slope {slope:.6} matches π/(2γ) = {bad:.6}, not π/(γ+l) = {good:.6}; \
                     the characteristic function of this problem cannot have that type"
                )));
            }
        }
        growth_check(v, |k| (PI * k as f64 / len).powi(2))?;
        let base = PotentialChar::new(geom.clone(), Potential::zero());
        let base_zeros = by_modulus(&roots::find_zeros(&base, n, &RootOptions::default())?);
        let start = n * 4 / 5;
        let tail: Vec<f64> =
            (start..n).map(|k| (k + 1) as f64 * (v[k] - base_zeros[k]).re).collect();
        let shift = if tail.is_empty() { 0.0 } else { tail.iter().sum::<f64>() / tail.len() as f64 };
        Ok(Kind::General { base, base_zeros, zeros: v.to_vec(), shift })
    }

    fn scaled_lg(&self, lambda: Complex64) -> Scaled {
        let Kind::Lg { lambda0, zeros, far, .. } = &self.kind else { unreachable!() };
        let (l, d) = (self.geom.l, self.geom.d);
        let w = Wave::new(lambda);
        let rho = w.rho;
        let step = PI / (2.0 * l);
        let nearest = (rho.re / step).round();
        let pole = (nearest >= 1.0
            && nearest as usize <= zeros.len()
            && (rho - nearest * step).norm() < 0.25 * step)
            .then_some(nearest as usize);

        let mut acc = Scaled { mant: (lambda - lambda0) * (d * d), log: w.decay * 2.0 * l };
        match pole {
            Some(n) => {
                let m = n as f64 * step;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let f = -sign * l * sinc_scaled((rho - m) * (2.0 * l)) / (rho * (rho + m));
                acc.mant *= f * (zeros[n - 1] - lambda);
            }
            None => acc.mant *= w.cs(2.0 * l, 2.0 * l).1 * 0.5,
        }
        let mut prod = Complex64::new(1.0, 0.0);
        for (i, z) in zeros.iter().enumerate() {
            let n = i + 1;
            if Some(n) == pole {
                continue;
            }
            let m2 = (n as f64 * step).powi(2);
            prod *= (z - lambda) / (m2 - lambda);
            if n % RENORM == 0 {
                renorm(&mut prod, &mut acc.log);
            }
        }
        let far_log = Complex64::new(far.0, 0.0) + lambda * far.1;
        acc.mant *= prod * far_log.exp();
        acc
    }

    fn scaled_general(&self, lambda: Complex64) -> Scaled {
        let Kind::General { base, base_zeros, zeros, shift } = &self.kind else { unreachable!() };
        let mut acc = base.scaled(lambda);
        let mut prod = Complex64::new(1.0, 0.0);
        for (k, (z, z0)) in zeros.iter().zip(base_zeros).enumerate() {
            let gap = z0 - lambda;
            if gap.norm() < 1e-6 * (1.0 + lambda.norm()) {
                // Δ₀(λ)/(λ⁰−λ) → −Δ₀′(λ⁰): replace the base value.
                let h = 1e-6 * (1.0 + z0.norm());
                let p = base.scaled(z0 + h);
                let m = base.scaled(z0 - h);
                let deriv = (p.rescaled(acc.log) - m.rescaled(acc.log)) / (2.0 * h);
                acc.mant = -deriv;
                prod *= z - lambda;
            } else {
                prod *= (z - lambda) / gap;
            }
            if (k + 1) % RENORM == 0 {
                renorm(&mut prod, &mut acc.log);
            }
        }
        // Tail Σ_{n>N} (s/n)/(λ⁰_n − λ) with λ⁰_n ≈ (πn/(γ+l))².
        if *shift != 0.0 {
            let len = self.geom.gamma + self.geom.l;
            let n0 = zeros.len();
            let mut t = Complex64::new(0.0, 0.0);
            let upto = 20 * n0.max(50);
            for n in n0 + 1..=upto {
                let lam0 = (PI * n as f64 / len).powi(2);
                t += shift / n as f64 / (lam0 - lambda);
            }
            t += shift * len * len / (PI * PI * 2.0 * (upto as f64).powi(2));
            prod *= t.exp();
        }
        acc.mant *= prod;
        acc
    }
}

fn renorm(prod: &mut Complex64, log: &mut f64) {
    let n = prod.norm();
    if n > 0.0 && n.is_finite() {
        *prod /= n;
        *log += n.ln();
    }
}

/// Coarse check that `|λ_n|` grows like the reference `r(n)` (n from 1).
fn growth_check(v: &[Complex64], r: impl Fn(usize) -> f64) -> Result<()> {
    let n = v.len();
    for k in n / 2..n {
        let ratio = v[k].norm() / r(k + 1).max(1e-300);
        if !(0.2..=5.0).contains(&ratio) {
            return Err(Error::Reconstruction(format!(
                "eigenvalue {} = {} does not grow like n² (ratio {ratio:.3} to the reference)",
                k + 1,
                v[k]
            )));
        }
    }
    Ok(())
}

impl Characteristic for ProductChar {
    fn geometry(&self) -> &Geometry {
        &self.geom
    }

    fn scaled(&self, lambda: Complex64) -> Scaled {
        match self.kind {
            Kind::Lg { .. } => self.scaled_lg(lambda),
            Kind::General { .. } => self.scaled_general(lambda),
        }
    }
}

/// Largest relative change on `grid` when the tail length doubles.
pub fn tail_doubling_gap(geom: &Geometry, values: &[Complex64], grid: &[Complex64]) -> Result<f64> {
    let a = ProductChar::new(geom, values)?;
    let k = match &a.kind {
        Kind::Lg { zeros, .. } => zeros.len(),
        Kind::General { .. } => return Ok(0.0),
    };
    let b = ProductChar::with_tail(geom, values, Some(2 * k))?;
    Ok(grid
        .iter()
        .map(|&z| {
            let (x, y) = (a.value(z), b.value(z));
            (x - y).norm() / y.norm().max(1e-300)
        })
        .fold(0.0, f64::max))
}
