//! Building-block solutions, the characteristic function, and spectra.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Potential, Profile};
use crate::product::ProductChar;
use crate::quad;
use crate::roots;
use crate::trig::Wave;

/// A complex value stored as `mant · exp(log)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mant: Complex64,
    pub log: f64,
}

impl Scaled {
    pub fn value(&self) -> Complex64 {
        self.mant * self.log.exp()
    }

    /// The value expressed against another log scale.
    pub fn rescaled(&self, log: f64) -> Complex64 {
        self.mant * (self.log - log).exp()
    }
}

/// An entire function of `λ` whose zeros are eigenvalues.
pub trait Characteristic: Send + Sync {
    fn geometry(&self) -> &Geometry;

    /// Evaluation scaled by `exp(-|Im ρ|(γ + l))`, so that large `|λ|` never
    /// overflows. `log` carries the removed growth.
    fn scaled(&self, lambda: Complex64) -> Scaled;

    fn value(&self, lambda: Complex64) -> Complex64 {
        self.scaled(lambda).value()
    }
}

/// Wraps a closure as a characteristic function (no scaling).
pub struct FnChar<F> {
    pub geom: Geometry,
    pub f: F,
}

impl<F: Fn(Complex64) -> Complex64 + Send + Sync> Characteristic for FnChar<F> {
    fn geometry(&self) -> &Geometry {
        &self.geom
    }

    fn scaled(&self, lambda: Complex64) -> Scaled {
        Scaled { mant: (self.f)(lambda), log: 0.0 }
    }
}

/// Δ backed by a potential through its closed form.
#[derive(Clone, Debug)]
pub struct PotentialChar {
    pub geom: Geometry,
    pub q: Potential,
}

impl PotentialChar {
    pub fn new(geom: Geometry, q: Potential) -> Self {
        Self { geom, q }
    }

    /// `∫₀^γ sin(ρt)/ρ q(t) dt` and `∫₀^l sin(ρu)/ρ q(b−u) du`, scaled by
    /// `exp(-|Im ρ|γ)` and `exp(-|Im ρ|l)` respectively.
    fn integrals(&self, w: &Wave) -> (Complex64, Complex64) {
        let g = &self.geom;
        let zero = Complex64::new(0.0, 0.0);
        let i0 = if self.q.left.is_zero() {
            zero
        } else {
            sine_moment(w, &self.q.left, 0.0, g.gamma, 0.0, 1.0, g.gamma)
        };
        let ib = if self.q.right.is_zero() {
            zero
        } else {
            sine_moment(w, &self.q.right, g.a(), g.b(), g.b(), -1.0, g.l)
        };
        (i0, ib)
    }

    fn delta(&self, w: &Wave) -> Scaled {
        let g = &self.geom;
        let (cl, sl) = w.cs(g.l, g.l);
        let (cg, sg) = w.cs(g.gamma, g.gamma);
        let lam = w.lambda;
        let c1 = cl - lam * g.d * sl;
        let c2 = cl * g.d + (Complex64::new(1.0, 0.0) - lam * (g.d * g.d)) * sl;
        let mut mant = -c1 * sg - c2 * cg;
        if !self.q.is_zero() {
            let (i0, ib) = self.integrals(w);
            mant -= sg * ib + c2 * i0 + sg * sl * (g.d * self.q.q_at_gamma);
        }
        Scaled { mant, log: w.decay * (g.gamma + g.l) }
    }

    fn delta_lg(&self, w: &Wave) -> Scaled {
        let g = &self.geom;
        let (l, d) = (g.l, g.d);
        let lam = w.lambda;
        let (c2l, s2l) = w.cs(2.0 * l, 2.0 * l);
        let (cl, sl) = w.cs(l, l);
        let mut mant = s2l * (0.5 * d * d) * lam - c2l * d - s2l - sl * sl * (d * self.q.q_at_gamma);
        if !self.q.is_zero() {
            let (i0, ib) = self.integrals(w);
            mant += (sl * (lam * d * d - 1.0) - cl * d) * i0 - sl * ib;
        }
        Scaled { mant, log: w.decay * 2.0 * l }
    }
}

impl Characteristic for PotentialChar {
    fn geometry(&self) -> &Geometry {
        &self.geom
    }

    fn scaled(&self, lambda: Complex64) -> Scaled {
        self.delta(&Wave::new(lambda))
    }
}

/// The characteristic function, backed by a potential or by a spectrum.
#[derive(Clone, Debug)]
pub enum CharFunction {
    Potential(PotentialChar),
    Product(Box<ProductChar>),
}

impl CharFunction {
    pub fn from_potential(geom: &Geometry, q: &Potential) -> Self {
        CharFunction::Potential(PotentialChar::new(geom.clone(), q.clone()))
    }
}

impl Characteristic for CharFunction {
    fn geometry(&self) -> &Geometry {
        match self {
            CharFunction::Potential(p) => &p.geom,
            CharFunction::Product(p) => p.geometry(),
        }
    }

    fn scaled(&self, lambda: Complex64) -> Scaled {
        match self {
            CharFunction::Potential(p) => p.scaled(lambda),
            CharFunction::Product(p) => p.scaled(lambda),
        }
    }
}

/// `∫_lo^hi sin(ρu)/ρ · q(x) dx` with `u = dir·(x − origin)`, scaled by
/// `exp(-|Im ρ|·shift)`; needs `|u| ≤ shift` on the range.
///
/// Away from `ρ = 0` the kernel is split into `exp(±iρu)` and advanced
/// from panel to panel by multiplication, restarting from a direct
/// evaluation every few panels to bound round-off growth.
fn sine_moment(w: &Wave, q: &Profile, lo: f64, hi: f64, origin: f64, dir: f64, shift: f64) -> Complex64 {
    const RESTART: usize = 16;
    let omega = w.rho.norm();
    let breaks = q.breakpoints(lo, hi, quad::panel_count(omega, hi - lo));
    if omega * (hi - lo) < 4.0 {
        return quad::integrate(&breaks, |x| w.cs(dir * (x - origin), shift).1 * q.eval(x));
    }
    let (xs, ws) = quad::gauss_legendre();
    let panels = breaks.len() - 1;
    let width = (hi - lo) / panels as f64;
    let half = 0.5 * width;
    let i = Complex64::new(0.0, 1.0);
    let ir = i * w.rho * dir;
    let fp: Vec<Complex64> = xs.iter().map(|x| (ir * (half * x)).exp()).collect();
    let fm: Vec<Complex64> = fp.iter().map(|f| f.inv()).collect();
    let (sp, sm) = ((ir * width).exp(), (-ir * width).exp());
    let scaled_exp = |z: Complex64| {
        let m = (z.re - w.decay * shift).exp();
        let (sn, cs) = z.im.sin_cos();
        Complex64::new(m * cs, m * sn)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    let (mut ep, mut em) = (acc, acc);
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * width;
        if p % RESTART == 0 {
            let u = ir * (mid - origin);
            ep = scaled_exp(u);
            em = scaled_exp(-u);
        } else {
            ep *= sp;
            em *= sm;
        }
        for k in 0..xs.len() {
            acc += (ep * fp[k] - em * fm[k]) * (ws[k] * q.eval(mid + half * xs[k]));
        }
    }
    acc * half / (2.0 * i * w.rho)
}

fn ensure_finite(v: Complex64, what: &str, lambda: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("{what} is not finite at λ = {lambda}")))
    }
}

/// `S(x, λ) = sin ρ(x−γ)/ρ` on `[0, γ]`.
pub fn eval_s(x: f64, lambda: Complex64, geom: &Geometry) -> Result<Complex64> {
    if !(0.0..=geom.gamma).contains(&x) {
        return Err(Error::Domain(format!("x = {x} lies outside [0, {}]", geom.gamma)));
    }
    Ok(Wave::new(lambda).cs_plain(x - geom.gamma).1)
}

/// `C(x, λ) = cos ρ(x−γ) + ∫_γ^x sin ρ(x−t)/ρ q(t) dt` on `[0, γ]`.
pub fn eval_c(x: f64, lambda: Complex64, q: &Potential, geom: &Geometry) -> Result<Complex64> {
    if !(0.0..=geom.gamma).contains(&x) {
        return Err(Error::Domain(format!("x = {x} lies outside [0, {}]", geom.gamma)));
    }
    let w = Wave::new(lambda);
    let span = geom.gamma - x;
    let mut v = w.cs_plain(span).0;
    if !q.left.is_zero() && span > 0.0 {
        let e = (w.decay * span).exp();
        v += sine_moment(&w, &q.left, x, geom.gamma, x, 1.0, span) * e;
    }
    ensure_finite(v, "C(x, λ)", lambda)
}

/// `(c₁, c₂, s)` with their removable-singularity limits at `λ = 0`.
pub fn eval_c1_c2_s(lambda: Complex64, geom: &Geometry) -> (Complex64, Complex64, Complex64) {
    let w = Wave::new(lambda);
    let (cl, sl) = w.cs_plain(geom.l);
    let s = w.cs_plain(geom.gamma).1;
    let c1 = cl - lambda * geom.d * sl;
    let c2 = cl * geom.d + (Complex64::new(1.0, 0.0) - lambda * (geom.d * geom.d)) * sl;
    (c1, c2, s)
}

/// Characteristic function `Δ(λ)` from the potential.
pub fn eval_delta(lambda: Complex64, q: &Potential, geom: &Geometry) -> Result<Complex64> {
    let v = PotentialChar::new(geom.clone(), q.clone()).delta(&Wave::new(lambda)).value();
    ensure_finite(v, "Δ", lambda)
}

/// `Δ(λ)` through the rewritten form valid when `l = γ`.
pub fn eval_delta_case_lg(lambda: Complex64, q: &Potential, geom: &Geometry) -> Result<Complex64> {
    if !geom.is_lg() {
        return Err(Error::Precondition(format!(
            "the l = γ form needs l = γ, got l = {} and γ = {}",
            geom.l, geom.gamma
        )));
    }
    let v = PotentialChar::new(geom.clone(), q.clone()).delta_lg(&Wave::new(lambda)).value();
    ensure_finite(v, "Δ", lambda)
}

/// Where a spectrum came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumSource {
    Computed,
    Supplied,
}

/// Eigenvalues with multiplicity, ascending by real part then imaginary part.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
    pub k0: usize,
    pub source: SpectrumSource,
}

pub fn order(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl Spectrum {
    /// Sorts the values and counts zeros with tolerance `1e-10(1 + |λ_max|)`.
    pub fn computed(mut values: Vec<Complex64>) -> Self {
        values.sort_by(order);
        let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tol = 1e-10 * (1.0 + max);
        let k0 = values.iter().filter(|v| v.norm() <= tol).count();
        Self { values, k0, source: SpectrumSource::Computed }
    }

    /// An externally supplied spectrum; `k0` is taken as given.
    pub fn supplied(mut values: Vec<Complex64>, k0: usize) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain(format!("non-finite eigenvalue {v}")));
        }
        values.sort_by(order);
        Ok(Self { values, k0, source: SpectrumSource::Supplied })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The first `n` eigenvalues (smallest `|λ|`) of the problem with potential `q`.
pub fn compute_spectrum(q: &Potential, geom: &Geometry, n: usize) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let ch = PotentialChar::new(geom.clone(), q.clone());
    let zeros = roots::find_zeros(&ch, n, &roots::RootOptions::default())?;
    Ok(Spectrum::computed(zeros))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn unit() -> Geometry {
        Geometry::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn s_values() {
        let g = unit();
        assert_eq!(eval_s(1.0, c(7.3), &g).unwrap(), c(0.0));
        assert!(eval_s(0.0, c(PI * PI), &g).unwrap().norm() < 1e-15);
        let v = eval_s(0.5, c(4.0), &g).unwrap();
        assert!((v - c(-(1.0f64).sin() / 2.0)).norm() < 1e-15);
        assert!(eval_s(1.5, c(1.0), &g).is_err());
    }

    #[test]
    fn c_values() {
        let g = unit();
        let one = Potential::from_fns(&g, |_| 1.0, |_| 0.0);
        assert_eq!(eval_c(1.0, c(3.0), &one, &g).unwrap(), c(1.0));
        let v = eval_c(0.3, c(5.0), &Potential::zero(), &g).unwrap();
        assert!((v - c((5.0f64.sqrt() * 0.7).cos())).norm() < 1e-15);
        assert!((eval_c(0.0, c(0.0), &one, &g).unwrap() - c(1.5)).norm() < 1e-14);
    }

    #[test]
    fn c1_c2_s_limits() {
        let g = unit();
        let (c1, c2, s) = eval_c1_c2_s(c(0.0), &g);
        assert_eq!((c1, c2, s), (c(1.0), c(2.0), c(1.0)));
        let g2 = Geometry::new(1.0, 0.5, 2.0).unwrap();
        let (c1, _, s) = eval_c1_c2_s(c((PI / 2.0).powi(2)), &g2);
        assert!((c1 - c(-1.0)).norm() < 1e-14);
        assert!((s - c((PI / 2.0).sin() * 2.0 / PI)).norm() < 1e-15);
    }

    #[test]
    fn delta_zero_potential() {
        let g = unit();
        let z = Potential::zero();
        assert!((eval_delta(c(0.0), &z, &g).unwrap() - c(-3.0)).norm() < 1e-15);
        let (c1, c2, s) = eval_c1_c2_s(c(4.0), &g);
        let direct = -c1 * s - c2 * (2.0f64).cos();
        assert!((eval_delta(c(4.0), &z, &g).unwrap() - direct).norm() < 1e-14);
        let v = eval_delta_case_lg(c((PI / 2.0).powi(2)), &z, &g).unwrap();
        assert!((v - c(1.0)).norm() < 1e-14);
        assert!((eval_delta_case_lg(c(0.0), &z, &g).unwrap() - c(-3.0)).norm() < 1e-15);
    }

    #[test]
    fn case_lg_requires_equal_lengths() {
        let g = Geometry::new(1.0, 1.0, 2.0).unwrap();
        assert!(matches!(
            eval_delta_case_lg(c(1.0), &Potential::zero(), &g),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn spectrum_ordering_and_k0() {
        let s = Spectrum::computed(vec![
            Complex64::new(3.0, -1.0),
            c(0.0),
            Complex64::new(3.0, 1.0),
            c(-2.0),
            c(1e-13),
        ]);
        assert_eq!(s.k0, 2);
        assert_eq!(s.values[0], c(-2.0));
        assert_eq!(s.values[3], Complex64::new(3.0, -1.0));
    }
}
