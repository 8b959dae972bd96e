//! Partial-wave bases, decomposition round trips and serialization.

use std::f64::consts::PI;

use dirac_coulomb::partialwave::{
    angular_basis, channel_indices, decompose, project_dirac_nonradial, project_dirac_radial, reconstruct, Angles,
    AngularQuadrature, Component,
};
use dirac_coulomb::{ChannelProfile, PartialWaveField, RadialGrid, WaveIndex};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Closed-form spinor harmonics for `m = 1/2`:
/// `Ξ^+_{-1,1/2} = (i Y_0^0, 0, 0, 0)`,
/// `Ξ^-_{-1,1/2} = (0, 0, (Y_1^0 − √2 Y_1^1)/√3)`.
#[test]
fn lowest_3d_spinors_match_tables() {
    let ix = WaveIndex::new_3d(-1, Some(0.5)).unwrap();
    for &(theta, phi) in &[(0.3, 0.0), (1.1, 2.5), (2.9, 5.9)] {
        let a = Angles::Sphere { theta, phi };
        let y00 = 0.5 / PI.sqrt();
        let y10 = (3.0 / (4.0 * PI)).sqrt() * f64::cos(theta);
        let y11 = Complex64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * f64::sin(theta), phi);
        let plus = angular_basis(ix, Component::Plus, a).unwrap();
        let minus = angular_basis(ix, Component::Minus, a).unwrap();
        let want_plus = [c(0.0, y00), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let s3 = 3f64.sqrt();
        let want_minus = [c(0.0, 0.0), c(0.0, 0.0), c(y10 / s3, 0.0), -y11 * (2f64.sqrt() / s3)];
        for i in 0..4 {
            assert!((plus[i] - want_plus[i]).norm() < 1e-14);
            assert!((minus[i] - want_minus[i]).norm() < 1e-14);
        }
    }
}

#[test]
fn unit_norm_on_the_circle() {
    let q = AngularQuadrature::circle(64);
    for ix in channel_indices(2, 7.5).unwrap() {
        for comp in Component::BOTH {
            let s: f64 = q
                .points
                .iter()
                .zip(&q.weights)
                .map(|(&p, w)| w * angular_basis(ix, comp, p).unwrap().iter().map(|z| z.norm_sqr()).sum::<f64>())
                .sum();
            assert!((s - 1.0).abs() < 1e-13);
        }
    }
}

fn random_field(n: u8, grid: &RadialGrid, k_max: f64, seed: u64) -> PartialWaveField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = PartialWaveField::new(n, grid.clone()).unwrap();
    for ix in channel_indices(n, k_max).unwrap() {
        let (a, b, w): (f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
        let prof = |phase: f64| -> Vec<Complex64> {
            grid.nodes().iter().map(|&r| Complex64::from_polar((-(r - w) * (r - w)).exp(), phase * r)).collect()
        };
        f.insert(ix, ChannelProfile { plus: prof(a).iter().map(|z| z * a).collect(), minus: prof(b).iter().map(|z| z * b).collect() })
            .unwrap();
    }
    f
}

#[test]
fn decompose_inverts_reconstruct() {
    let grid = RadialGrid::log_uniform(0.05, 4.0, 0.25).unwrap();
    for (n, kmax) in [(2u8, 7.5), (3, 5.0)] {
        let f = random_field(n, &grid, kmax, 7 + n as u64);
        let sampler = |r: f64, a: Angles| {
            let j = grid.nodes().iter().position(|&x| x == r).unwrap();
            let mut v = vec![c(0.0, 0.0); if n == 2 { 2 } else { 4 }];
            for (&ix, p) in f.channels() {
                let bp = angular_basis(ix, Component::Plus, a).unwrap();
                let bm = angular_basis(ix, Component::Minus, a).unwrap();
                for s in 0..v.len() {
                    v[s] += p.plus[j] * bp[s] + p.minus[j] * bm[s];
                }
            }
            v
        };
        let d = decompose(n, &grid, sampler, kmax).unwrap();
        let diff = d.field.combine(c(1.0, 0.0), &f, c(-1.0, 0.0)).unwrap();
        assert!(diff.norm() / f.norm() < 1e-10, "n={n}: {}", diff.norm() / f.norm());
        assert!(d.residual_fraction < 1e-10);
        // Parseval against the sampled field energy
        let q = AngularQuadrature::for_band(n, kmax).unwrap();
        let samples = reconstruct(&f, &q.points).unwrap();
        let dens: Vec<f64> = samples
            .iter()
            .map(|row| row.iter().zip(&q.weights).map(|(v, w)| w * v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum())
            .collect();
        let total = grid.integrate(n, &dens);
        assert!((total / f.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn aliased_field_reports_residual() {
    let grid = RadialGrid::log_uniform(0.5, 2.0, 0.2).unwrap();
    let d = decompose(2, &grid, |_, a| match a {
        Angles::Circle(t) => vec![c(0.0, 0.0), Complex64::from_polar(1.0, 9.0 * t)],
        _ => unreachable!(),
    }, 2.5)
    .unwrap();
    assert!(d.residual_fraction > 0.99);
}

#[test]
fn single_channel_field_decomposes_exactly() {
    let grid = RadialGrid::log_uniform(0.1, 3.0, 0.1).unwrap();
    let ix = WaveIndex::new_3d(2, Some(-1.5)).unwrap();
    let g = |r: f64| r * (-r).exp();
    let d = decompose(3, &grid, |r, a| {
        angular_basis(ix, Component::Plus, a).unwrap().iter().map(|z| z * g(r)).collect()
    }, 3.0)
    .unwrap();
    for (&k, p) in d.field.channels() {
        for (j, &r) in grid.nodes().iter().enumerate() {
            let want = if k == ix { g(r) } else { 0.0 };
            assert!((p.plus[j] - want).norm() < 1e-12 && p.minus[j].norm() < 1e-12);
        }
    }
}

#[test]
fn json_round_trip_is_bit_exact() {
    let grid = RadialGrid::log_uniform(1e-3, 7.0, 0.0371).unwrap();
    for n in [2u8, 3] {
        let f = random_field(n, &grid, 2.5, 99);
        let back = PartialWaveField::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
        let json: serde_json::Value = serde_json::from_str(&f.to_json().unwrap()).unwrap();
        let first = &json["channels"][0];
        assert!(first["k"].is_number() && first["f_plus"][0].is_array());
        assert_eq!(first.get("m_k").is_some(), n == 3);
    }
}

#[test]
fn rejects_mismatched_profiles() {
    let grid = RadialGrid::log_uniform(0.1, 1.0, 0.1).unwrap();
    let mut f = PartialWaveField::new(3, grid).unwrap();
    let ix = WaveIndex::new_3d(1, Some(0.5)).unwrap();
    assert!(f.insert(ix, ChannelProfile::zeros(3)).is_err());
    assert!(f.insert(WaveIndex::new_3d(1, None).unwrap(), ChannelProfile::zeros(f.grid().len())).is_err());
    assert!(f.insert(WaveIndex::new_2d(0.5).unwrap(), ChannelProfile::zeros(f.grid().len())).is_err());
}

proptest! {
    #[test]
    fn projections_are_orthogonal_idempotent(seed in 0u64..1000) {
        let grid = RadialGrid::log_uniform(0.1, 3.0, 0.2).unwrap();
        for n in [2u8, 3] {
            let f = random_field(n, &grid, 2.5, seed);
            let (a, b) = (project_dirac_radial(&f), project_dirac_nonradial(&f));
            prop_assert_eq!(project_dirac_radial(&a), a.clone());
            prop_assert_eq!(project_dirac_nonradial(&b), b.clone());
            prop_assert!(a.is_dirac_radial() && b.is_dirac_nonradial());
            let sum = a.combine(c(1.0, 0.0), &b, c(1.0, 0.0)).unwrap();
            prop_assert_eq!(sum, f.clone());
            prop_assert!(((a.norm_sqr() + b.norm_sqr()) / f.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spinor_harmonics_orthonormal_at_random_m(k in 1i32..5, neg in any::<bool>(), j in 0usize..8) {
        let k = if neg { -k } else { k };
        let two_top = 2 * k.abs() - 1;
        let two_m = -two_top + 2 * (j as i32 % (two_top + 1).max(1)).min(two_top);
        let ix = WaveIndex::new_3d(k, Some(two_m as f64 / 2.0)).unwrap();
        let q = AngularQuadrature::for_band(3, 5.0).unwrap();
        let g = q.gram(&[(ix, Component::Plus), (ix, Component::Minus)]).unwrap();
        prop_assert!((g[0][0] - 1.0).norm() < 1e-12 && (g[1][1] - 1.0).norm() < 1e-12 && g[0][1].norm() < 1e-12);
    }
}
