use std::f64::consts::PI;

use frozen_spectrum::forward::{compute_spectrum, eval_c1_c2_s, eval_delta, eval_delta_case_lg};
use frozen_spectrum::roots::count_in_disk;
use frozen_spectrum::{CharFunction, Complex64, Geometry, Potential};
use proptest::prelude::*;

fn unit() -> Geometry {
    Geometry::new(1.0, 1.0, 1.0).unwrap()
}

fn smooth(g: &Geometry) -> Potential {
    Potential::from_fns(g, |t| (PI * t).cos(), |t| t - 2.0)
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Positive zeros of `ρ/2·sin 2ρ − cos 2ρ − sin 2ρ/ρ` by scanning and
/// bisection, squared.
fn zero_potential_eigenvalues(count: usize) -> Vec<f64> {
    let f = |r: f64| 0.5 * r * (2.0 * r).sin() - (2.0 * r).cos() - (2.0 * r).sin() / r;
    let mut out = Vec::new();
    let mut a = 1e-3;
    while out.len() < count {
        let b = a + 1e-3;
        if f(a) * f(b) < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if f(lo) * f(m) <= 0.0 {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            out.push((0.5 * (lo + hi)).powi(2));
        }
        a = b;
    }
    out
}

#[test]
fn zero_potential_matches_bisection() {
    let g = unit();
    let spec = compute_spectrum(&Potential::zero(), &g, 5).unwrap();
    let oracle = zero_potential_eigenvalues(5);
    for (v, o) in spec.values.iter().zip(&oracle) {
        assert!(v.im == 0.0 && (v.re - o).abs() < 1e-10 * o, "{v} vs {o}");
    }
}

#[test]
fn eigenvalues_are_zeros_of_delta() {
    let g = Geometry::new(1.0, 0.6, 1.4).unwrap();
    let q = Potential::from_fns(&g, |t| 2.0 * t - 1.0, |x| (3.0 * x).sin());
    let spec = compute_spectrum(&q, &g, 40).unwrap();
    assert_eq!(spec.len(), 40);
    for v in &spec.values {
        // Δ grows like |ρ|; compare with the size of its terms.
        let scale = 1.0 + v.norm().sqrt() * g.d * g.d;
        let r = eval_delta(*v, &q, &g).unwrap().norm();
        assert!(r < 1e-8 * scale, "Δ({v}) = {r}");
    }
}

#[test]
fn winding_count_matches_number_of_eigenvalues() {
    let g = unit();
    let q = smooth(&g);
    let spec = compute_spectrum(&q, &g, 21).unwrap();
    let mut moduli: Vec<f64> = spec.values.iter().map(|v| v.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    let radius = 0.5 * (moduli[19] + moduli[20]);
    let ch = CharFunction::from_potential(&g, &q);
    assert_eq!(count_in_disk(&ch, radius, 512).unwrap(), 20);
}

#[test]
fn spectra_are_closed_under_conjugation() {
    let g = Geometry::new(1.0, 0.5, 1.0).unwrap();
    let mut complex = 0;
    for k in [-40.0, 25.0, 80.0] {
        let q = Potential::from_fns(&g, move |t| k * (2.0 * t).sin(), move |x| k * x.cos());
        let spec = compute_spectrum(&q, &g, 30).unwrap();
        complex += spec.values.iter().filter(|v| v.im != 0.0).count();
        for v in &spec.values {
            let partner = spec.values.iter().map(|w| (w - v.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(partner <= 1e-9 * v.norm().max(1.0), "q scale {k}: {v} has no conjugate");
        }
    }
    assert!(complex >= 2, "the test set should include a complex pair");
}

/// Δ((πn/γ)²) = k_n((−1)ⁿ⁺¹ − γκ_n/(πn)) with κ_n by composite Simpson.
#[test]
fn delta_at_sine_nodes_matches_quadrature() {
    let g = Geometry::new(1.0, 0.8, 1.3).unwrap();
    let q = Potential::from_fns(&g, |t| (t * t + 1.0).ln(), |x| x.sqrt());
    let simpson = |f: &dyn Fn(f64) -> f64, cells: usize| {
        let h = g.gamma / cells as f64;
        (0..=cells)
            .map(|i| {
                let w = if i == 0 || i == cells { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * f(i as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0
    };
    for n in 1..=15 {
        let w = PI * n as f64 / g.gamma;
        let lam = c(w * w);
        let kn = eval_c1_c2_s(lam, &g).1.re;
        let kappa = simpson(&|t| (w * t).sin() * (t * t + 1.0).ln(), 20000);
        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
        let expect = kn * (sign - g.gamma * kappa / (PI * n as f64));
        let got = eval_delta(lam, &q, &g).unwrap().re;
        assert!((got - expect).abs() < 1e-8 * expect.abs().max(1.0), "n = {n}: {got} vs {expect}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equal_length_form_agrees(re in -100.0f64..100.0, im in -100.0f64..100.0, k in -5.0f64..5.0) {
        prop_assume!(re.hypot(im) <= 100.0);
        let g = Geometry::new(1.0, 0.7, 1.0).unwrap();
        let q = Potential::from_fns(&g, move |t| k * (t - 0.3).powi(2), move |x| (k * x).sin());
        let lam = Complex64::new(re, im);
        let a = eval_delta(lam, &q, &g).unwrap();
        let b = eval_delta_case_lg(lam, &q, &g).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn real_potentials_give_conjugate_symmetric_delta(re in -200.0f64..200.0, im in -50.0f64..50.0, k in -5.0f64..5.0) {
        let g = Geometry::new(1.2, 0.4, 0.9).unwrap();
        let q = Potential::from_fns(&g, move |t| k * t.cos(), move |x| k / (1.0 + x));
        let lam = Complex64::new(re, im);
        let a = eval_delta(lam, &q, &g).unwrap();
        let b = eval_delta(lam.conj(), &q, &g).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn delta_is_a_function_of_lambda(rho in 0.1f64..30.0, im in -3.0f64..3.0) {
        let g = unit();
        let q = smooth(&g);
        let r = Complex64::new(rho, im);
        let a = eval_delta(r * r, &q, &g).unwrap();
        let b = eval_delta((-r) * (-r), &q, &g).unwrap();
        prop_assert_eq!(a, b);
    }
}
