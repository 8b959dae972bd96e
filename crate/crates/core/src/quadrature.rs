//! Quadrature rules: Gauss–Legendre nodes and the endpoint-corrected
//! (Gregory) trapezoid rule used on uniform grids in `ln r`.

use std::f64::consts::PI;

/// Gregory end weights of order 8 for unit step; interior weights are 1.
/// Exact for polynomials of degree <= 7 on uniform grids with >= 16 nodes.
pub const GREGORY8: [f64; 8] = [
    1070017.0 / 3628800.0,
    5537111.0 / 3628800.0,
    103613.0 / 403200.0,
    261115.0 / 145152.0,
    298951.0 / 725760.0,
    515677.0 / 403200.0,
    3349879.0 / 3628800.0,
    3662753.0 / 3628800.0,
];

/// Unit-step weights for `n` equispaced samples. Falls back to the plain
/// trapezoid rule when the grid is too short for the end corrections.
pub fn gregory_weights(n: usize) -> Vec<f64> {
    let m = GREGORY8.len();
    let mut w = vec![1.0; n];
    if n < 2 {
        return w;
    }
    if n < 2 * m {
        w[0] = 0.5;
        w[n - 1] = 0.5;
        return w;
    }
    for (j, &c) in GREGORY8.iter().enumerate() {
        w[j] = c;
        w[n - 1 - j] = c;
    }
    w
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|t| half * t).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        for d in 0..32 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d)).sum();
            let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {d}");
        }
    }

    #[test]
    fn gauss_legendre_known_nodes() {
        let (x, w) = gauss_legendre(3);
        assert!((x[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn gregory_is_exact_through_degree_seven() {
        for n in [16usize, 17, 40] {
            let w = gregory_weights(n);
            let l = (n - 1) as f64;
            for d in 0..8 {
                let q: f64 = (0..n).map(|j| w[j] * (j as f64).powi(d)).sum();
                let exact = l.powi(d + 1) / (d as f64 + 1.0);
                assert!(((q - exact) / exact).abs() < 1e-12, "n = {n}, degree {d}");
            }
        }
    }

    #[test]
    fn gregory_weights_are_positive() {
        assert!(GREGORY8.iter().all(|&c| c > 0.0));
        let s: f64 = GREGORY8.iter().map(|c| c - 1.0).sum::<f64>();
        assert!((s + 0.5).abs() < 1e-15);
    }

    #[test]
    fn gregory_converges_at_eighth_order() {
        // ∫_0^2 cos 3x dx on grids of spacing h and h/2
        let err = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let w = gregory_weights(n);
            let q: f64 = (0..n).map(|j| w[j] * (3.0 * j as f64 * h).cos()).sum::<f64>() * h;
            (q - 6f64.sin() / 3.0).abs()
        };
        let (e1, e2) = (err(21), err(41));
        assert!(e1 / e2 > 200.0, "ratio {}", e1 / e2);
    }
}
