//! Hartree potential, nonlinearity and the Picard solver.

use std::f64::consts::PI;

use dirac_coulomb::hankel::GridSpec;
use dirac_coulomb::nonlinear::*;
use dirac_coulomb::propagator::{evolve_trajectory, ring_datum, smooth_bump, uniform_times, Provenance, Trajectory};
use dirac_coulomb::{ChannelProfile, Error, PartialWaveField, RadialGrid, WaveIndex};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn spec() -> GridSpec {
    GridSpec::new(12.0, 6.0)
}

/// Dirac-radial ring on `k = −1` (both `m`) with `‖u‖ = norm`, plus an
/// identically zero `k = 2` channel.
fn datum(norm: f64) -> PartialWaveField {
    let spec = spec();
    let (r, _) = spec.grids().unwrap();
    let mut u = PartialWaveField::new(3, r.clone()).unwrap();
    for (m, a) in [(0.5, 1.0), (-0.5, 0.6)] {
        let ix = WaveIndex::new_3d(-1, Some(m)).unwrap();
        let ring = ring_datum(ix, &spec, 4.0, 1.0, c(a, 0.0), c(0.0, 0.4 * a)).unwrap();
        u.insert(ix, ring.channel(&ix).unwrap().clone()).unwrap();
    }
    u.insert(WaveIndex::new_3d(2, Some(0.5)).unwrap(), ChannelProfile::zeros(r.len())).unwrap();
    u.scale(c(norm / u.norm(), 0.0))
}

fn max_rel_diff(a: &PartialWaveField, b: &PartialWaveField) -> f64 {
    a.combine(c(1.0, 0.0), b, c(-1.0, 0.0)).unwrap().norm() / b.norm()
}

fn higher_channels_vanish(u: &PartialWaveField) -> bool {
    u.channels().iter().filter(|(ix, _)| !ix.is_dirac_radial()).all(|(_, p)| p.is_zero())
}

// -------------------------------------------------------------- potential

#[test]
fn yukawa_potential_of_a_gaussian_matches_the_fourier_oracle() {
    // Nodes 2^{j/40}, so the oracle radii are grid points.
    let h_step = 2f64.ln() / 40.0;
    let grid = RadialGrid::log_uniform_count(2f64.powi(-20), h_step, 40 * 24 + 1);
    let density: Vec<f64> = grid.nodes().iter().map(|r| (-r * r).exp()).collect();
    let v = radial_convolution(&ConvolutionKernel::yukawa(1.0, 1.0).unwrap(), &grid, &density).unwrap();
    for (j, want) in [
        (-3, 2.8296621491397718),
        (-1, 2.4823514841007547),
        (0, 1.6702996721932313),
        (1, 0.47024083256120827),
        (2, 0.032738608909961586),
    ] {
        let i = (40 * (20 + j)) as usize;
        assert!((grid.nodes()[i] - 2f64.powi(j)).abs() < 1e-12);
        assert!((v[i] / want - 1.0).abs() < 1e-4, "r=2^{j}: {} vs {want}", v[i]);
    }
}

#[test]
fn narrow_kernel_reproduces_the_density() {
    let width = 1e-2;
    let radii: Vec<f64> = (0..=400).map(|i| width * i as f64 / 400.0).collect();
    let raw: Vec<f64> = radii.iter().map(|t| smooth_bump(-width, width, *t)).collect();
    // ∫ω d³x by the trapezoid rule on the (piecewise-linear) table.
    let mass = 4.0 * PI * radii.windows(2).zip(raw.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (t[0] * t[0] * v[0] + t[1] * t[1] * v[1])).sum::<f64>();
    let omega = ConvolutionKernel::tabulated(radii, raw.iter().map(|x| x / mass).collect(), vec![]).unwrap();
    let grid = RadialGrid::log_uniform(1e-3, 6.0, 5e-4).unwrap();
    let density: Vec<f64> = grid.nodes().iter().map(|r| (-r * r).exp()).collect();
    let v = radial_convolution(&omega, &grid, &density).unwrap();
    let diff: Vec<f64> = v.iter().zip(&density).map(|(a, b)| (a - b).powi(2)).collect();
    let sq: Vec<f64> = density.iter().map(|b| b * b).collect();
    let rel = (grid.integrate(3, &diff) / grid.integrate(3, &sq)).sqrt();
    assert!(rel < 1e-2, "{rel:e}");
}

/// `ω = κ` on `[0, L]`: for `r + s ≤ L` the potential is `κ ∫⟨βu,u⟩ d³x`.
fn flat_kernel(kappa: f64) -> ConvolutionKernel {
    ConvolutionKernel::tabulated(vec![0.0, 100.0], vec![kappa, kappa], vec![]).unwrap()
}

fn charge(u: &PartialWaveField) -> f64 {
    u.grid().integrate(3, &hartree_density(u)) * 4.0 * PI
}

#[test]
fn flat_kernel_gives_a_constant_multiple() {
    let u = datum(0.7);
    let kappa = 0.3;
    let n = apply_nonlinearity(&flat_kernel(kappa), &u).unwrap();
    let want = u.scale(c(kappa * charge(&u), 0.0));
    // Split and unsplit Gregory sums differ at the rule's order-8 error,
    // (h / 0.25)^8 for this ring.
    let e = max_rel_diff(&n, &want);
    assert!(e < 1e-7, "{e:e}");
}

#[test]
fn nonlinearity_edge_cases() {
    let omega = ConvolutionKernel::yukawa(1.0, 1.0).unwrap();
    let u = datum(0.5);
    let z = apply_nonlinearity(&omega, &u.zeros_like()).unwrap();
    assert_eq!(z.norm(), 0.0);
    assert!(hartree_potential(&omega, &u.zeros_like()).unwrap().iter().all(|v| *v == 0.0));
    let n = apply_nonlinearity(&omega, &u).unwrap();
    assert!(higher_channels_vanish(&n) && n.channels().len() == u.channels().len());

    let mut bad = u.clone();
    let (r, _) = spec().grids().unwrap();
    let ix = WaveIndex::new_3d(2, Some(0.5)).unwrap();
    bad.insert(ix, ChannelProfile { plus: vec![c(1e-3, 0.0); r.len()], minus: vec![c(0.0, 0.0); r.len()] }).unwrap();
    assert!(matches!(apply_nonlinearity(&omega, &bad), Err(Error::NonRadial(_))));
    let two_d = ring_datum(WaveIndex::new_2d(0.5).unwrap(), &spec(), 4.0, 1.0, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    assert!(apply_nonlinearity(&omega, &two_d).is_err());
}

// ----------------------------------------------------------------- Picard

#[test]
fn zero_datum_and_zero_kernel_converge_at_once() {
    let omega = ConvolutionKernel::yukawa(1.0, 1.0).unwrap();
    let cfg = PicardConfig { t_final: Some(0.5), intervals: 4, ..Default::default() };
    let u0 = datum(0.5);
    let st = picard_solve(&u0.zeros_like(), 0.5, &omega, &cfg).unwrap();
    assert!(st.converged && st.iterates.len() == 2);
    assert!(st.solution().states().iter().all(|u| u.norm() == 0.0));

    let st = picard_solve(&u0, 0.5, &ConvolutionKernel::zero(), &cfg).unwrap();
    assert!(st.converged && st.iterates.len() == 2);
    assert_eq!(st.contraction_factors.len(), st.iterates.len() - 1);
    let linear = evolve_trajectory(&u0, 0.5, st.solution().times()).unwrap();
    for (a, b) in st.solution().states().iter().zip(linear.states()) {
        assert!(max_rel_diff(a, b) < 1e-12);
    }
}

#[test]
fn flat_kernel_solution_is_a_phase_times_the_free_flow() {
    let u0 = datum(0.8);
    let (kappa, nu, t_final) = (0.4, 0.5, 1.0);
    let cfg = PicardConfig { t_final: Some(t_final), intervals: 8, tol: 1e-12, ..Default::default() };
    let st = picard_solve(&u0, nu, &flat_kernel(kappa), &cfg).unwrap();
    assert!(st.converged);
    // Phase exp(−iκ ∫₀^t Q(s) ds), with the β-charge Q of the free flow on
    // a fine grid.
    let fine = uniform_times(0.0, t_final, 257);
    let q: Vec<f64> = evolve_trajectory(&u0, nu, &fine).unwrap().states().iter().map(charge).collect();
    let mut phase_integral = vec![0.0; fine.len()];
    for i in 1..fine.len() {
        phase_integral[i] = phase_integral[i - 1] + 0.5 * (fine[i] - fine[i - 1]) * (q[i] + q[i - 1]);
    }
    let linear = evolve_trajectory(&u0, nu, st.solution().times()).unwrap();
    for (i, (u, free)) in st.solution().states().iter().zip(linear.states()).enumerate() {
        let theta = kappa * phase_integral[32 * i];
        let want = free.scale(Complex64::from_polar(1.0, -theta));
        assert!(max_rel_diff(u, &want) < 1e-5, "node {i}: {:e}", max_rel_diff(u, &want));
    }
}

#[test]
fn yukawa_run_contracts_and_conserves_mass() {
    let omega = ConvolutionKernel::yukawa(1.0, 1.0).unwrap();
    let u0 = datum(0.5);
    let st = picard_solve(&u0, 0.5, &omega, &PicardConfig::default()).unwrap();
    assert!(st.converged);
    assert!(st.t_final < 1.0, "the smallness rule should bind: T = {}", st.t_final);
    assert!(st.contraction_factors[1..].iter().all(|f| *f < 1.0));
    assert!(st.mass_drift() < 1e-2);
    for traj in &st.iterates {
        assert!(traj.states().iter().all(higher_channels_vanish));
    }
    let half = picard_solve(&u0, 0.5, &omega, &PicardConfig { t_final: Some(st.t_final / 2.0), ..Default::default() }).unwrap();
    let ratio = half.contraction_factors[1] / st.contraction_factors[1];
    assert!(ratio <= 0.5, "halving T scaled the first contraction factor by {ratio}");

    let report = wellposedness_certificate(&st, 2.0).unwrap();
    assert_eq!(report.s_high, Some(0.75));
    assert!(report.finite && !report.equivalence_boundary);
}

#[test]
fn divergent_runs_are_reported() {
    let omega = ConvolutionKernel::yukawa(1.0, 1.0).unwrap();
    let cfg = PicardConfig { t_final: Some(1.0), intervals: 8, ..Default::default() };
    // A spatially constant potential keeps every iterate on the grid; with
    // κQT large the iterates are growing Taylor partial sums of the phase.
    match picard_solve(&datum(0.8), 0.5, &flat_kernel(60.0), &cfg) {
        Err(Error::NonContraction { factors }) => assert!(factors.iter().rev().take(3).all(|f| *f > 1.0)),
        Err(e) => panic!("unexpected error {e}"),
        Ok(st) => panic!("no contraction failure; factors {:?}", st.contraction_factors),
    }
    assert!(matches!(picard_solve(&datum(0.5), 0.9, &omega, &cfg), Err(Error::CouplingOutOfRange { .. })));
}

#[test]
fn duhamel_difference_is_cubically_homogeneous() {
    let omega = ConvolutionKernel::yukawa(1.0, 1.0).unwrap();
    let nu = 0.5;
    let times = uniform_times(0.0, 0.5, 5);
    let base = datum(1.0);
    let z = datum(1.0).scale(c(0.3, -0.2));
    let mut ks = Vec::new();
    for a in [0.05, 0.5, 2.0] {
        let u = evolve_trajectory(&base.scale(c(a, 0.0)), nu, &times).unwrap();
        // v agrees with u at t = 0 and departs linearly in t.
        let states: Vec<PartialWaveField> = u
            .states()
            .iter()
            .zip(&times)
            .map(|(s, t)| s.combine(c(1.0, 0.0), &z, c(a * t, 0.0)).unwrap())
            .collect();
        let v = Trajectory::new(times.clone(), states, Provenance::Linear).unwrap();
        let (pu, pv) = (duhamel_map(nu, &omega, &u).unwrap(), duhamel_map(nu, &omega, &v).unwrap());
        let sup = |x: &Trajectory, y: &Trajectory| {
            x.states().iter().zip(y.states()).map(|(p, q)| p.combine(c(1.0, 0.0), q, c(-1.0, 0.0)).unwrap().norm()).fold(0.0, f64::max)
        };
        let size = |x: &Trajectory| x.states().iter().map(|s| s.norm()).fold(0.0, f64::max);
        let k = sup(&pu, &pv) / ((size(&u) + size(&v)).powi(2) * sup(&u, &v));
        ks.push(k);
    }
    println!("Lipschitz constants {ks:?}");
    for k in &ks {
        assert!(k.is_finite() && *k > 0.0);
        assert!((k / ks[0] - 1.0).abs() < 1e-6, "{ks:?}");
    }
}

#[test]
fn certificate_regimes() {
    let omega = ConvolutionKernel::bracket(2.0).unwrap();
    let cfg = PicardConfig { t_final: Some(0.25), intervals: 4, p_omega: 1.5, ..Default::default() };
    let st = picard_solve(&datum(0.3), 0.5, &omega, &cfg).unwrap();
    assert!(st.converged);

    let at_boundary = wellposedness_certificate(&st, 1.5).unwrap();
    assert_eq!(at_boundary.s_high, Some(1.0));
    assert!(at_boundary.equivalence_boundary && at_boundary.finite);

    let bounded = wellposedness_certificate(&st, f64::INFINITY).unwrap();
    assert_eq!(bounded.s_high, Some(0.0));
    assert!((bounded.sup_l2 / datum(0.3).norm() - 1.0).abs() < 1e-2);

    let threshold = low_regularity_threshold(0.5);
    assert!((threshold - 1.0980762113533160).abs() < 1e-12);
    let low = wellposedness_certificate(&st, 1.1).unwrap();
    assert_eq!(low.s_high, None);
    assert!((low.s_low.unwrap() - 1.0 / 1.1).abs() < 1e-15);
    assert!(low.mixed_norm.unwrap().is_finite() && low.finite);
    let below = wellposedness_certificate(&st, 1.05).unwrap();
    assert!(below.s_low.is_none() && below.mixed_norm.is_none());
}
