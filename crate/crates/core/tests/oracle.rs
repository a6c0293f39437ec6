use std::f64::consts::PI;

use frozen_spectrum::forward::compute_spectrum;
use frozen_spectrum::oracle::{fd_spectrum, FdMesh};
use frozen_spectrum::roots::count_in_disk;
use frozen_spectrum::{CharFunction, Complex64, Geometry, Potential};

fn unit() -> Geometry {
    Geometry::new(1.0, 1.0, 1.0).unwrap()
}

fn max_rel_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm() / y.norm()).fold(0.0, f64::max)
}

#[test]
fn zero_potential_matches_forward() {
    let g = unit();
    let fd = fd_spectrum(&Potential::zero(), &g, 1e-3, 5).unwrap();
    let exact = compute_spectrum(&Potential::zero(), &g, 5).unwrap();
    let gap = max_rel_gap(&fd.values, &exact.values);
    assert!(gap < 1e-3, "{gap}");
}

#[test]
fn second_order_convergence() {
    let g = Geometry::new(1.0, 0.5, 1.5).unwrap();
    let q = Potential::from_fns(&g, |t| (PI * t).cos(), |x| x - 2.0);
    let exact = compute_spectrum(&q, &g, 8).unwrap();
    let gaps: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&h| max_rel_gap(&fd_spectrum(&q, &g, h, 8).unwrap().values, &exact.values))
        .collect();
    for w in gaps.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..5.5).contains(&ratio), "{gaps:?}");
    }
}

#[test]
fn complex_pairs_are_conjugate_and_counted() {
    let g = Geometry::new(1.0, 0.5, 1.0).unwrap();
    let q = Potential::from_fns(&g, |t| 25.0 * (2.0 * t).sin(), |x| 25.0 * x.cos());
    let fd = fd_spectrum(&q, &g, 1e-3, 12).unwrap();
    assert!(fd.values.iter().any(|v| v.im != 0.0), "{:?}", fd.values);
    for v in &fd.values {
        let partner = fd.values.iter().map(|w| (w - v.conj()).norm()).fold(f64::INFINITY, f64::min);
        assert!(partner <= 1e-9 * v.norm(), "{v}");
    }
    // Count the first 10 inside a circle between the 10th and 11th moduli.
    let mut m: Vec<f64> = fd.values.iter().map(|v| v.norm()).collect();
    m.sort_by(f64::total_cmp);
    let radius = 0.5 * (m[9] + m[10]);
    let ch = CharFunction::from_potential(&g, &q);
    assert_eq!(count_in_disk(&ch, radius, 512).unwrap(), 10);
}

#[test]
fn mesh_must_fit_both_segments() {
    let g = Geometry::new(1.0, 0.5, 0.75).unwrap();
    assert_eq!(FdMesh::new(&g, 0.125).unwrap().dim(), 13);
    assert!(FdMesh::new(&g, 0.25).is_err(), "three steps on [a, b]");
    assert!(FdMesh::new(&g, 0.1).is_err());
    assert!(fd_spectrum(&Potential::zero(), &g, 0.125, 3).is_ok());
    assert!(fd_spectrum(&Potential::zero(), &g, 0.125, 5).is_err());
}
