//! Composite 8-point Gauss–Legendre quadrature.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

const ORDER: usize = 8;

/// Nodes and weights on `[-1, 1]`, from Newton iteration on `P_8`.
pub fn gauss_legendre() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut x = [0.0; ORDER];
        let mut w = [0.0; ORDER];
        for i in 0..ORDER {
            let mut z = (PI * (i as f64 + 0.75) / (ORDER as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=ORDER {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = ORDER as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        (x, w)
    })
}

/// Panels needed so each spans at most π/4 of kernel phase `omega·len`.
pub fn panel_count(omega: f64, len: f64) -> usize {
    let p = (omega * len / (PI / 4.0)).ceil();
    (p.max(4.0).min(1e7)) as usize
}

/// `∫ f` over consecutive panels delimited by `breaks`.
pub fn integrate(breaks: &[f64], mut f: impl FnMut(f64) -> Complex64) -> Complex64 {
    let (x, w) = gauss_legendre();
    let mut acc = Complex64::new(0.0, 0.0);
    for p in breaks.windows(2) {
        let (mid, half) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..ORDER {
            s += f(mid + half * x[k]) * w[k];
        }
        acc += s * half;
    }
    acc
}

/// Real-valued variant of [`integrate`].
pub fn integrate_real(breaks: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre();
    let mut acc = 0.0;
    for p in breaks.windows(2) {
        let (mid, half) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
        let mut s = 0.0;
        for k in 0..ORDER {
            s += f(mid + half * x[k]) * w[k];
        }
        acc += s * half;
    }
    acc
}

/// Uniform breakpoints.
pub fn uniform(lo: f64, hi: f64, panels: usize) -> Vec<f64> {
    (0..=panels).map(|k| lo + (hi - lo) * k as f64 / panels as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_to_degree_15() {
        let (x, w) = gauss_legendre();
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in 0..16 {
            let q: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn oscillatory_integral() {
        let rho = 200.0;
        let v = integrate_real(&uniform(0.0, 1.0, panel_count(rho, 1.0)), |t| (rho * t).sin() * t);
        let exact = ((rho).sin() - rho * rho.cos()) / (rho * rho);
        assert!((v - exact).abs() < 1e-15);
    }
}
