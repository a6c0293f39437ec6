//! Recovery of the potential from the spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{compute_z, expand_biorthogonal, gram_matrix, BasisZeros};
use crate::error::{Error, Result};
use crate::forward::{eval_c1_c2_s, CharFunction, Characteristic, Spectrum};
use crate::geometry::{Geometry, Potential};
use crate::linalg::fit_columns_weighted;
use crate::product::ProductChar;
use crate::quad;
use crate::seq::{CoeffSeq, SeqKind};

/// Δ rebuilt from the spectrum as a product over its zeros.
pub fn reconstruct_charfn(spec: &Spectrum, geom: &Geometry) -> Result<CharFunction> {
    Ok(CharFunction::Product(Box::new(ProductChar::new(geom, &spec.values)?)))
}

/// `κ_n = −(πn/(k_n γ))·(Δ((πn/γ)²) + (−1)ⁿ k_n)` with `k_n = c₂((πn/γ)²)`;
/// these are the sine coefficients `∫₀^γ sin(πnt/γ) q(t) dt`.
pub fn recover_kappa<C: Characteristic + ?Sized>(ch: &C, geom: &Geometry, n: usize) -> Result<CoeffSeq> {
    let vals: Vec<f64> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let w = PI * k as f64 / geom.gamma;
            let lam = Complex64::new(w * w, 0.0);
            let kn = eval_c1_c2_s(lam, geom).1.re;
            if kn.abs() < 1e-10 {
                return Err(Error::CommonZero { n: k, detail: format!("c2((πn/γ)²) = {kn:e}") });
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            Ok(-(w / kn) * (ch.value(lam).re + sign * kn))
        })
        .collect::<Result<_>>()?;
    Ok(CoeffSeq::from_real(SeqKind::Kappa, 1, &vals))
}

/// `ξ_n = ∫₀^l sin(z_n u) q(b−u) du`, read off `Δ(z_n²)` where `c₂` vanishes.
pub fn recover_xi<C: Characteristic + ?Sized>(
    ch: &C,
    z: &BasisZeros,
    q_at_gamma: f64,
    geom: &Geometry,
) -> Result<CoeffSeq> {
    let vals: Vec<f64> = z
        .z
        .par_iter()
        .enumerate()
        .map(|(i, &zn)| {
            let sg = (zn * geom.gamma).sin();
            if sg.abs() < 1e-8 {
                return Err(Error::CommonZero { n: i + 1, detail: format!("sin(z_n γ) = {sg:e}") });
            }
            let lam = Complex64::new(zn * zn, 0.0);
            let c1 = eval_c1_c2_s(lam, geom).0.re;
            let delta = ch.value(lam).re;
            Ok(-zn * zn * delta / sg - zn * c1 - geom.d * q_at_gamma * (zn * geom.l).sin())
        })
        .collect::<Result<_>>()?;
    Ok(CoeffSeq::from_real(SeqKind::Xi, 1, &vals))
}

/// Endpoint values and the coefficient remainder left after removing the
/// linear function through them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndpointFit {
    /// Value at the start of the local variable (`t = 0` or `u = 0`).
    pub start: f64,
    /// Value at the end (`t = γ` or `u = l`).
    pub end: f64,
    pub remainder: Vec<f64>,
}

/// Splits the moments `m_n` of `f` against a sine family into the moments of
/// `A + B·s` (`s` the normalized variable) plus a remainder. The remainder
/// vanishes at both ends, so its moments decay like `n⁻³`; `extra` holds
/// the `n⁻³`- and `n⁻⁵`-type columns that model it inside the fit. Rows
/// are weighted by `1/σ_n`, the propagated noise of each moment.
fn endpoint_fit(
    m: &[f64],
    sigma: &[f64],
    one: &(dyn Fn(usize) -> f64 + Sync),
    ramp: &(dyn Fn(usize) -> f64 + Sync),
    extra: [&dyn Fn(usize) -> f64; 4],
) -> Result<EndpointFit> {
    let n = m.len();
    if n < 8 {
        return Err(Error::InsufficientData(format!("endpoint fit needs 8 coefficients, got {n}")));
    }
    let ns: Vec<usize> = ((n / 8).max(1) + 1..=n).collect();
    let y: Vec<f64> = ns.iter().map(|&k| m[k - 1]).collect();
    let scale = m.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-300);
    let w: Vec<f64> = ns.iter().map(|&k| 1.0 / (sigma[k - 1] + 1e-13 * scale)).collect();
    let cols: [&dyn Fn(usize) -> f64; 6] = [&one, &ramp, extra[0], extra[1], extra[2], extra[3]];
    let c = fit_columns_weighted(&ns, &y, &w, &cols)?;
    let (a, b) = (c[0], c[1]);
    let remainder = (1..=n).map(|k| m[k - 1] - a * one(k) - b * ramp(k)).collect();
    Ok(EndpointFit { start: a, end: a + b, remainder })
}

/// Endpoint fit of the `κ` sequence on `(0, γ)`; `sigma` is the noise of
/// each `κ_n` (zeros for exact data).
pub fn kappa_endpoints(kappa: &CoeffSeq, sigma: &[f64], geom: &Geometry) -> Result<EndpointFit> {
    let g = geom.gamma;
    let sign = |n: usize| if n % 2 == 0 { 1.0 } else { -1.0 };
    endpoint_fit(
        &kappa.re(),
        sigma,
        &|n| g * (1.0 - sign(n)) / (PI * n as f64),
        &|n| -g * sign(n) / (PI * n as f64),
        [
            &|n| 1.0 / (n as f64).powi(3),
            &|n| sign(n) / (n as f64).powi(3),
            &|n| 1.0 / (n as f64).powi(5),
            &|n| sign(n) / (n as f64).powi(5),
        ],
    )
}

/// Endpoint fit of the `ξ` sequence in the variable `u = b − x`.
pub fn xi_endpoints(xi: &CoeffSeq, sigma: &[f64], z: &BasisZeros) -> Result<EndpointFit> {
    let l = z.geometry.l;
    let zz = &z.z;
    endpoint_fit(
        &xi.re(),
        sigma,
        &|n| (1.0 - (zz[n - 1] * l).cos()) / zz[n - 1],
        &|n| {
            let x = zz[n - 1];
            ((x * l).sin() - x * l * (x * l).cos()) / (x * x * l)
        },
        [
            &|n| 1.0 / zz[n - 1].powi(3),
            &|n| (zz[n - 1] * l).cos() / zz[n - 1].powi(3),
            &|n| 1.0 / zz[n - 1].powi(5),
            &|n| (zz[n - 1] * l).cos() / zz[n - 1].powi(5),
        ],
    )
}

/// Relative rounding level assumed for eigenvalues.
pub(crate) const EIGEN_EPS: f64 = 4.0 * f64::EPSILON;

/// Largest admissible amplified noise in `ξ_n`, relative to `max(1, |ξ|)`.
const XI_NOISE: f64 = 1e-5;

/// `|dΔ/dλ|` by a central difference.
pub(crate) fn slope<C: Characteristic + ?Sized>(ch: &C, lam: f64) -> f64 {
    let h = 1e-6 * (1.0 + lam);
    let d = ch.value(Complex64::new(lam + h, 0.0)) - ch.value(Complex64::new(lam - h, 0.0));
    d.norm() / (2.0 * h)
}

/// Noise of `κ_n` propagated from eigenvalue rounding: `κ_n` is `Δ` at
/// `(πn/γ)²` times `πn/(γ|k_n|)`, and `Δ` moves by `|Δ′|·ε|λ|`.
pub fn kappa_noise<C: Characteristic + ?Sized>(ch: &C, geom: &Geometry, n: usize) -> Vec<f64> {
    (1..=n)
        .into_par_iter()
        .map(|k| {
            let w = PI * k as f64 / geom.gamma;
            let lam = w * w;
            let kn = eval_c1_c2_s(Complex64::new(lam, 0.0), geom).1.norm();
            w / kn * slope(ch, lam) * EIGEN_EPS * lam
        })
        .collect()
}

/// Noise of `ξ_n`: `ξ_n = −z²Δ(z²)/sin(zγ) − …` multiplies `Δ(z_n²)` by
/// roughly `n³`, and for `l = γ` the point `z_n` sits within `O(n⁻³)` of
/// `√λ_{2n}`, so `Δ(z_n²)` is known only as well as that eigenvalue.
pub fn xi_noise<C: Characteristic + ?Sized>(ch: &C, z: &BasisZeros, geom: &Geometry) -> Vec<f64> {
    z.z.par_iter()
        .map(|&zn| {
            let lam = zn * zn;
            lam / (zn * geom.gamma).sin().abs() * slope(ch, lam) * EIGEN_EPS * lam
        })
        .collect()
}

/// How many leading `ξ_n` are resolved: the count stops where `z_n²`
/// passes `lambda_limit` or the noise exceeds the budget relative to
/// `max(1, |ξ|)`.
pub fn usable_xi(z: &BasisZeros, xi: &CoeffSeq, noise: &[f64], lambda_limit: f64) -> usize {
    let scale = xi.values.iter().take(5).map(|v| v.norm()).fold(1.0, f64::max);
    z.z.iter()
        .zip(noise)
        .take_while(|(zn, s)| *zn * *zn <= lambda_limit && **s <= XI_NOISE * scale)
        .count()
}

/// Verdict of one uniqueness restriction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniquenessReport {
    /// `l = kγ` for an integer `k`.
    pub condition1: Verdict,
    /// `πl/γ` and `πd/γ` rational.
    pub condition2: Verdict,
    /// `l/γ` and `πd/γ` rational and `cos(l/d) ≠ 0`.
    pub condition3: Verdict,
    pub overall: Verdict,
    pub k: Option<i64>,
}

pub fn check_uniqueness(geom: &Geometry) -> UniquenessReport {
    let ex = &geom.exact;
    let (condition1, k) = match &ex.l_over_gamma {
        Some(r) if r.is_integer() && *r.numer() >= 1 => (Verdict::Pass, Some(*r.numer())),
        Some(_) => (Verdict::Fail, None),
        None => {
            let x = geom.l / geom.gamma;
            let k = x.round();
            if k >= 1.0 && (x - k).abs() <= 1e-9 * x {
                (Verdict::Pass, Some(k as i64))
            } else {
                (Verdict::Fail, None)
            }
        }
    };
    let condition2 = if ex.pi_l_over_gamma.is_some() && ex.pi_d_over_gamma.is_some() {
        Verdict::Pass
    } else {
        Verdict::Undetermined
    };
    let condition3 = if ex.l_over_gamma.is_some() && ex.pi_d_over_gamma.is_some() {
        if (geom.l / geom.d).cos().abs() > 1e-12 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    } else {
        Verdict::Undetermined
    };
    let all = [condition1, condition2, condition3];
    let overall = if all.contains(&Verdict::Pass) {
        Verdict::Pass
    } else if all.contains(&Verdict::Undetermined) {
        Verdict::Undetermined
    } else {
        Verdict::Fail
    };
    UniquenessReport { condition1, condition2, condition3, overall, k }
}

#[derive(Clone, Debug)]
pub struct InverseOptions {
    /// Proceed even if no uniqueness restriction is known to hold.
    pub force: bool,
    /// Output samples per segment.
    pub grid: usize,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self { force: false, grid: 513 }
    }
}

/// Everything Algorithm 1 produced along the way.
#[derive(Clone, Debug)]
pub struct Recovery {
    pub potential: Potential,
    pub left_grid: Vec<f64>,
    pub left: Vec<f64>,
    pub right_grid: Vec<f64>,
    pub right: Vec<f64>,
    pub kappa: CoeffSeq,
    pub xi: CoeffSeq,
    pub kappa_fit: EndpointFit,
    pub xi_fit: EndpointFit,
    pub uniqueness: UniquenessReport,
}

/// Splits `n` eigenvalues between the two segments in proportion to their
/// lengths: Δ from `n` eigenvalues is reliable up to `|λ| ≈ (πn/(γ+l))²`.
pub fn coefficient_counts(geom: &Geometry, n: usize) -> (usize, usize) {
    let len = geom.gamma + geom.l;
    let nk = ((n as f64 * geom.gamma / len).round() as usize).max(1);
    let nx = ((n as f64 * geom.l / len).round() as usize).max(1);
    (nk, nx)
}

/// Algorithm 1: Δ from the spectrum, then `κ_n` give `q` on `[0, γ]`, then
/// `ξ_n` give `q` on `[a, b]` through the Riesz basis `{sin z_n t}`.
pub fn recover_potential(spec: &Spectrum, geom: &Geometry, n: usize, opts: &InverseOptions) -> Result<Recovery> {
    let uniqueness = check_uniqueness(geom);
    if uniqueness.overall != Verdict::Pass && !opts.force {
        return Err(Error::Precondition(format!(
            "no uniqueness restriction is known to hold ({:?}); pass --force to proceed",
            uniqueness.overall
        )));
    }
    if spec.len() < n {
        return Err(Error::InsufficientData(format!("{n} eigenvalues requested, {} supplied", spec.len())));
    }
    if opts.grid < 2 {
        return Err(Error::Domain("output grid needs at least 2 points".into()));
    }
    let mut values = spec.values.clone();
    values.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(crate::forward::order(a, b)));
    values.truncate(n);
    let ch = ProductChar::new(geom, &values)?;
    let (nk, nx) = coefficient_counts(geom, n);
    // Δ is trusted only below the last few supplied eigenvalues.
    let limit = values.get(n.saturating_sub(3)).map_or(0.0, |v| v.norm());
    let nk = nk.min((limit.sqrt() * geom.gamma / PI).floor() as usize);

    let kappa = recover_kappa(&ch, geom, nk)?;
    let kappa_fit = kappa_endpoints(&kappa, &kappa_noise(&ch, geom, nk), geom)?;
    let gamma = geom.gamma;
    let left_grid = quad::uniform(0.0, gamma, opts.grid - 1);
    let mut left: Vec<f64> = left_grid
        .par_iter()
        .map(|&t| {
            let s: f64 = kappa_fit
                .remainder
                .iter()
                .enumerate()
                .map(|(i, r)| r * (PI * (i + 1) as f64 * t / gamma).sin())
                .sum();
            kappa_fit.start + (kappa_fit.end - kappa_fit.start) * t / gamma + 2.0 / gamma * s
        })
        .collect();
    let q_gamma = kappa_fit.end;
    *left.last_mut().expect("grid is non-empty") = q_gamma;
    left[0] = kappa_fit.start;

    let z_all = compute_z(geom, nx)?;
    let xi_all = recover_xi(&ch, &z_all, q_gamma, geom)?;
    let noise = xi_noise(&ch, &z_all, geom);
    let keep = usable_xi(&z_all, &xi_all, &noise, limit);
    if keep < 8 {
        return Err(Error::InsufficientData(format!(
            "only {keep} of {nx} ξ coefficients are resolved by {n} eigenvalues"
        )));
    }
    let z = BasisZeros {
        z: z_all.z[..keep].to_vec(),
        residuals: z_all.residuals[..keep].to_vec(),
        geometry: z_all.geometry.clone(),
        diagnostics: z_all.diagnostics.clone(),
    };
    let xi = CoeffSeq::from_real(SeqKind::Xi, 1, &xi_all.re()[..keep]);
    let xi_fit = xi_endpoints(&xi, &noise[..keep], &z)?;
    let gram = gram_matrix(&z)?;
    let rem = CoeffSeq::from_real(SeqKind::Xi, 1, &xi_fit.remainder);
    let l = geom.l;
    let u_grid = quad::uniform(0.0, l, opts.grid - 1);
    let r = expand_biorthogonal(&rem, &z, &gram, &u_grid)?;
    let f_at = |i: usize| xi_fit.start + (xi_fit.end - xi_fit.start) * u_grid[i] / l + r[i];
    let right_grid = quad::uniform(geom.a(), geom.b(), opts.grid - 1);
    // x = b − u, so the right-segment samples run backwards in u.
    let right: Vec<f64> = (0..opts.grid).map(|i| f_at(opts.grid - 1 - i)).collect();

    let potential = Potential::from_grids(geom, left.clone(), right.clone(), q_gamma)?;
    Ok(Recovery { potential, left_grid, left, right_grid, right, kappa, xi, kappa_fit, xi_fit, uniqueness })
}

/// Relative L² errors `(left, right)` of `rec` against `truth`, by
/// Gauss–Legendre quadrature on each segment. A vanishing true segment
/// reports the absolute error instead.
pub fn l2_errors(truth: &Potential, rec: &Potential, geom: &Geometry) -> (f64, f64) {
    let seg = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64| {
        let br = quad::uniform(lo, hi, 256);
        let num = quad::integrate_real(&br, |x| (f(x) - g(x)).powi(2)).sqrt();
        let den = quad::integrate_real(&br, |x| g(x).powi(2)).sqrt();
        if den > 0.0 {
            num / den
        } else {
            num
        }
    };
    let left = seg(0.0, geom.gamma, &|x| rec.left.eval(x), &|x| truth.left.eval(x));
    let right = seg(geom.a(), geom.b(), &|x| rec.right.eval(x), &|x| truth.right.eval(x));
    (left, right)
}
