//! Cross-checks between independently implemented special functions.

use dirac_coulomb::specfun::{bessel_j, gamma, hyp1f1};
use num_complex::Complex64;

/// `J_μ(x)` through Kummer's function: `(x/2)^μ e^{-ix} 1F1(μ+1/2; 2μ+1; 2ix) / Γ(μ+1)`.
fn bessel_via_kummer(mu: f64, x: f64) -> f64 {
    let (m, _) = hyp1f1(
        Complex64::new(mu + 0.5, 0.0),
        Complex64::new(2.0 * mu + 1.0, 0.0),
        Complex64::new(0.0, 2.0 * x),
    )
    .unwrap();
    let g = gamma(Complex64::new(mu + 1.0, 0.0)).unwrap().re;
    ((0.5 * x).powf(mu) / g * Complex64::new(0.0, -x).exp() * m).re
}

#[test]
fn kummer_and_bessel_routes_agree() {
    let mut worst = 0.0f64;
    for i in 0..=40 {
        let mu = 0.25 * i as f64;
        for j in 1..=100 {
            let x = 0.5 * j as f64;
            let a = bessel_j(mu, x).unwrap();
            let b = bessel_via_kummer(mu, x);
            let scale = a.abs().max(b.abs()).max(1e-3 * (2.0 / (std::f64::consts::PI * x)).sqrt());
            worst = worst.max((a - b).abs() / scale);
        }
    }
    assert!(worst < 1e-8, "worst relative discrepancy {worst:e}");
}

#[test]
fn kummer_route_satisfies_bessel_recurrence() {
    // J_{μ-1} + J_{μ+1} = 2μ/x J_μ
    for &mu in &[1.0, 2.5, 6.0] {
        for &x in &[3.0, 17.0, 41.0] {
            let lhs = bessel_via_kummer(mu - 1.0, x) + bessel_via_kummer(mu + 1.0, x);
            let rhs = 2.0 * mu / x * bessel_via_kummer(mu, x);
            assert!((lhs - rhs).abs() < 1e-10, "μ = {mu}, x = {x}");
        }
    }
}
