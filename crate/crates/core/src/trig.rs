//! Even functions of `ρ = √λ` evaluated without choosing a branch, plus
//! exponentially scaled variants that stay finite for large `|Im ρ|`.

use num_complex::Complex64;

const TAYLOR_RADIUS: f64 = 1e-2;
const TAYLOR_TERMS: usize = 6;

/// A spectral parameter `λ` together with `ρ` and `|Im ρ|`.
#[derive(Clone, Copy, Debug)]
pub struct Wave {
    pub lambda: Complex64,
    pub rho: Complex64,
    pub decay: f64,
}

impl Wave {
    pub fn new(lambda: Complex64) -> Self {
        let rho = lambda.sqrt();
        Self { lambda, rho, decay: rho.im.abs() }
    }

    /// `(cos ρx, sin(ρx)/ρ)` multiplied by `exp(-|Im ρ|·shift)`.
    /// Requires `|x| ≤ shift` so neither factor overflows.
    pub fn cs(&self, x: f64, shift: f64) -> (Complex64, Complex64) {
        if x < 0.0 {
            let (c, s) = self.cs(-x, shift);
            return (c, -s);
        }
        let z = self.rho * x;
        if z.norm() < TAYLOR_RADIUS {
            let w = -self.lambda * (x * x);
            let (mut c, mut s) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            let mut term = Complex64::new(1.0, 0.0);
            for k in 0..TAYLOR_TERMS {
                c += term;
                let t2 = term / (2 * k + 1) as f64;
                s += t2;
                term = t2 * w / (2 * k + 2) as f64;
            }
            let e = (-self.decay * shift).exp();
            return (c * e, s * (x * e));
        }
        let (sn, cs) = sin_cos_scaled(z, self.decay * shift);
        (cs, sn / self.rho)
    }

    /// Unscaled `(cos ρx, sin(ρx)/ρ)`.
    pub fn cs_plain(&self, x: f64) -> (Complex64, Complex64) {
        let (c, s) = self.cs(x, x.abs());
        let e = (self.decay * x.abs()).exp();
        (c * e, s * e)
    }
}

/// `(sin z, cos z)·exp(-shift)` for `shift ≥ |Im z|`.
pub fn sin_cos_scaled(z: Complex64, shift: f64) -> (Complex64, Complex64) {
    let (a, b) = (z.re, z.im);
    let e1 = (b.abs() - shift).exp();
    let e2 = (-b.abs() - shift).exp();
    let ch = 0.5 * (e1 + e2);
    let sh = 0.5 * (e1 - e2) * b.signum();
    let (sa, ca) = a.sin_cos();
    (Complex64::new(sa * ch, ca * sh), Complex64::new(ca * ch, -sa * sh))
}

/// `sin(w)/w · exp(-|Im w|)`.
pub fn sinc_scaled(w: Complex64) -> Complex64 {
    if w.norm() < TAYLOR_RADIUS {
        let w2 = -w * w;
        let mut s = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..TAYLOR_TERMS {
            s += term;
            term = term * w2 / ((2 * k + 2) * (2 * k + 3)) as f64;
        }
        s * (-w.im.abs()).exp()
    } else {
        sin_cos_scaled(w, w.im.abs()).0 / w
    }
}

/// Trigamma `ψ′(x) = Σ_{k≥0} 1/(x+k)²` for `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    acc + r + 0.5 * r2 + r * r2 * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 / 30.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matches_direct_formulas() {
        for lam in [c(4.0, 0.0), c(-9.0, 0.0), c(3.0, 7.0), c(1e-7, 1e-8), c(250.0, -40.0)] {
            let w = Wave::new(lam);
            for x in [0.0, 0.3, 1.0, 2.5] {
                let (cc, ss) = w.cs_plain(x);
                let rho = lam.sqrt();
                let ec = (rho * x).cos();
                let es = if rho.norm() == 0.0 { c(x, 0.0) } else { (rho * x).sin() / rho };
                assert!((cc - ec).norm() <= 1e-13 * (1.0 + ec.norm()), "{lam} {x}");
                assert!((ss - es).norm() <= 1e-13 * (1.0 + es.norm()), "{lam} {x}");
            }
        }
    }

    #[test]
    fn zero_limits() {
        let w = Wave::new(c(0.0, 0.0));
        let (cc, ss) = w.cs_plain(1.7);
        assert_eq!(cc, c(1.0, 0.0));
        assert!((ss - c(1.7, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scaled_values_stay_finite() {
        let w = Wave::new(c(-4.0e6, 1.0));
        let (cc, ss) = w.cs(1.0, 1.0);
        assert!(cc.norm().is_finite() && ss.norm().is_finite());
        assert!((cc.norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sinc_scaled_small_and_large() {
        assert!((sinc_scaled(c(1e-4, 0.0)) - c((1e-4f64).sin() / 1e-4, 0.0)).norm() < 1e-15);
        let w = c(2.0, 0.5);
        let direct = w.sin() / w * (-0.5f64).exp();
        assert!((sinc_scaled(w) - direct).norm() < 1e-15);
    }

    #[test]
    fn trigamma_values() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((trigamma(1.0) - pi2_6).abs() < 1e-13);
        assert!((trigamma(2.0) - (pi2_6 - 1.0)).abs() < 1e-13);
        let tail: f64 = (1000..2_000_000).map(|k| 1.0 / (k as f64).powi(2)).sum();
        assert!((trigamma(1000.0) - tail - 1.0 / 2_000_000.0).abs() < 1e-12);
    }
}
