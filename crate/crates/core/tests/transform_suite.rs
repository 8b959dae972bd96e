//! Distorted Hankel transform: isometry, inversion, diagonalization and the
//! free-kernel oracle.

use dirac_coulomb::eigen::make_channel;
use dirac_coulomb::hankel::{GridSpec, KernelSource, TransformPlan, Transformer};
use dirac_coulomb::partialwave::channel_indices;
use dirac_coulomb::{ChannelProfile, PartialWaveField, RadialGrid, WaveIndex};
use num_complex::Complex64;

fn ring(grid: &RadialGrid, center: f64, width: f64, twist: f64) -> ChannelProfile {
    let env = |r: f64| (-(r - center).powi(2) / (2.0 * width * width)).exp();
    ChannelProfile {
        plus: grid.nodes().iter().map(|&r| Complex64::from_polar(env(r), twist * r)).collect(),
        minus: grid.nodes().iter().map(|&r| env(r) * Complex64::new(0.3, -0.2 * r)).collect(),
    }
}

fn diff(a: &ChannelProfile, b: &ChannelProfile) -> ChannelProfile {
    ChannelProfile {
        plus: a.plus.iter().zip(&b.plus).map(|(x, y)| x - y).collect(),
        minus: a.minus.iter().zip(&b.minus).map(|(x, y)| x - y).collect(),
    }
}

fn tested_channels(n: u8) -> Vec<(WaveIndex, f64)> {
    let (ks, nus): (Vec<f64>, [f64; 3]) = if n == 2 {
        ((0..5).flat_map(|j| [j as f64 + 0.5, -(j as f64) - 0.5]).collect(), [0.0, 0.25, 0.45])
    } else {
        ((1..=5).flat_map(|k| [k as f64, -(k as f64)]).collect(), [0.0, 0.25, 0.9])
    };
    let mut out = Vec::new();
    for nu in nus {
        for &k in &ks {
            out.push((WaveIndex::from_parts(n, k, None).unwrap(), nu));
        }
    }
    out
}

const SPEC: GridSpec = GridSpec { r_min: 6.5e-9, r_max: 6.5, rho_min: 1.7e-8, rho_max: 17.0, oversampling: 2.0 };

#[test]
fn isometry_inversion_diagonalization_all_channels() {
    for n in [2u8, 3] {
        for (ix, nu) in tested_channels(n) {
            let plan = TransformPlan::from_spec(ix, nu, &SPEC).unwrap();
            let f = ring(plan.r_grid(), 3.0, 0.4, 0.5);
            let g = plan.forward(&f).unwrap();
            let iso = (plan.rho_norm(&g) / plan.r_norm(&f) - 1.0).abs();
            let inv = plan.r_norm(&diff(&plan.inverse(&g).unwrap(), &f)) / plan.r_norm(&f);
            let res = plan.diagonalization_residual(&f).unwrap();
            let fine = TransformPlan::from_spec(ix, nu, &SPEC.refined(2.0)).unwrap();
            let res_fine = fine.diagonalization_residual(&ring(fine.r_grid(), 3.0, 0.4, 0.5)).unwrap();
            assert!(iso < 1e-3 && inv < 1e-3, "{ix} nu={nu}: iso {iso:e}, inv {inv:e}");
            assert!(res < 1e-3 && res / res_fine >= 4.0, "{ix} nu={nu}: {res:e} -> {res_fine:e}");
        }
    }
}

#[test]
fn free_kernel_oracle() {
    let (r, rho) = SPEC.grids().unwrap();
    for (n, k) in [(2u8, 0.5), (2, -3.5), (3, 1.0), (3, -2.0), (3, 5.0)] {
        let ch = make_channel(WaveIndex::from_parts(n, k, None).unwrap(), 0.0).unwrap();
        let kummer = TransformPlan::new(ch.clone(), r.clone(), rho.clone(), KernelSource::Kummer).unwrap();
        let bessel = TransformPlan::new(ch, r.clone(), rho.clone(), KernelSource::Bessel).unwrap();
        let f = ring(&r, 2.5, 0.5, -1.0);
        let (a, b) = (kummer.forward(&f).unwrap(), bessel.forward(&f).unwrap());
        let rel = kummer.rho_norm(&diff(&a, &b)) / bessel.rho_norm(&b);
        assert!(rel < 1e-5, "n={n} k={k}: {rel:e}");
    }
}

#[test]
fn linearity_and_adjointness() {
    let plan = TransformPlan::from_spec(WaveIndex::new_3d(2, None).unwrap(), 0.5, &SPEC).unwrap();
    let f1 = ring(plan.r_grid(), 3.0, 0.4, 0.0);
    let f2 = ring(plan.r_grid(), 2.0, 0.45, 1.0);
    let (a, b) = (Complex64::new(0.7, -1.2), Complex64::new(-0.4, 0.1));
    let comb = ChannelProfile {
        plus: f1.plus.iter().zip(&f2.plus).map(|(x, y)| a * x + b * y).collect(),
        minus: f1.minus.iter().zip(&f2.minus).map(|(x, y)| a * x + b * y).collect(),
    };
    let (g1, g2, gc) = (plan.forward(&f1).unwrap(), plan.forward(&f2).unwrap(), plan.forward(&comb).unwrap());
    let lin = ChannelProfile {
        plus: g1.plus.iter().zip(&g2.plus).map(|(x, y)| a * x + b * y).collect(),
        minus: g1.minus.iter().zip(&g2.minus).map(|(x, y)| a * x + b * y).collect(),
    };
    assert!(plan.rho_norm(&diff(&gc, &lin)) / plan.rho_norm(&gc) < 1e-12);

    // ⟨P f, h⟩_ρ = ⟨f, P^{-1} h⟩_r with h the transform of another ring
    let h = g2;
    let lhs: Complex64 = inner(plan.rho_grid(), 3, &g1, &h);
    let rhs: Complex64 = inner(plan.r_grid(), 3, &f1, &plan.inverse(&h).unwrap());
    assert!((lhs - rhs).norm() / lhs.norm().max(1e-300) < 1e-3);
}

fn inner(grid: &RadialGrid, n: u8, a: &ChannelProfile, b: &ChannelProfile) -> Complex64 {
    let w = grid.measure(n);
    (0..w.len()).map(|j| (a.plus[j].conj() * b.plus[j] + a.minus[j].conj() * b.minus[j]) * w[j]).sum()
}

/// A spectral profile concentrated near `ρ̄` produces radial oscillations of
/// wavelength `2π/ρ̄`; the dominant frequency is located by a direct
/// periodogram scan of the envelope-corrected real part.
#[test]
fn narrow_spectrum_sets_the_wavelength() {
    let spec = GridSpec::new(40.0, 12.0);
    let rho_bar = 6.0;
    let plan = TransformPlan::from_spec(WaveIndex::new_3d(1, None).unwrap(), 0.5, &spec).unwrap();
    let bump = |rho: f64| (-(rho - rho_bar).powi(2) / (2.0 * 0.25f64.powi(2))).exp();
    let g = ChannelProfile {
        plus: plan.rho_grid().nodes().iter().map(|&p| Complex64::new(bump(p), 0.0)).collect(),
        minus: vec![Complex64::new(0.0, 0.0); plan.rho_grid().len()],
    };
    let f = plan.inverse(&g).unwrap();
    let samples: Vec<(f64, f64)> = plan
        .r_grid()
        .nodes()
        .iter()
        .zip(&f.plus)
        .filter(|(r, _)| **r > 2.0 && **r < 20.0)
        .map(|(&r, z)| (r, z.re * r))
        .collect();
    let power = |w: f64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for pair in samples.windows(2) {
            let (r0, y0) = pair[0];
            let (r1, _) = pair[1];
            acc += Complex64::from_polar(y0 * (r1 - r0), -w * r0);
        }
        acc.norm_sqr()
    };
    let peak = (1..2000).map(|i| i as f64 * 0.01).max_by(|a, b| power(*a).total_cmp(&power(*b))).unwrap();
    assert!((peak - rho_bar).abs() / rho_bar < 0.1, "peak at {peak}");
}

#[test]
fn field_transform_roundtrip_3d() {
    let indices = channel_indices(3, 2.0).unwrap();
    let t = Transformer::new(3, 0.5, &SPEC, &indices).unwrap();
    let mut f = PartialWaveField::new(3, t.r_grid().clone()).unwrap();
    for (i, ix) in indices.iter().enumerate() {
        f.insert(*ix, ring(t.r_grid(), 2.2 + 0.05 * i as f64, 0.4, i as f64 * 0.05)).unwrap();
    }
    let g = t.forward(&f).unwrap();
    assert!((g.norm() / f.norm() - 1.0).abs() < 1e-6);
    let back = t.inverse(&g).unwrap();
    let d = back.combine(Complex64::new(1.0, 0.0), &f, Complex64::new(-1.0, 0.0)).unwrap();
    assert!(d.norm() / f.norm() < 1e-6);
    let json = g.to_json().unwrap();
    assert!(json.contains("\"rho_grid\""));
    assert_eq!(dirac_coulomb::SpectralField::from_json(&json).unwrap(), g);
}
