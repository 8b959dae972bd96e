//! Exact flow: unitarity, group law, block structure, the free cross-check
//! and band-limited data.

use dirac_coulomb::hankel::{GridSpec, KernelSource};
use dirac_coulomb::partialwave::channel_indices;
use dirac_coulomb::propagator::{band_limited_datum, ring_datum, smooth_bump, uniform_times, Propagator};
use dirac_coulomb::{ChannelProfile, PartialWaveField, SpectralField, Transformer, WaveIndex};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel_diff(a: &PartialWaveField, b: &PartialWaveField) -> f64 {
    a.combine(c(1.0, 0.0), b, c(-1.0, 0.0)).unwrap().norm() / b.norm()
}

/// Multi-channel 3D datum of Gaussian rings plus one identically-zero channel.
fn datum_3d(spec: &GridSpec) -> PartialWaveField {
    let indices = channel_indices(3, 2.0).unwrap();
    let (r, _) = spec.grids().unwrap();
    let mut f = PartialWaveField::new(3, r.clone()).unwrap();
    for (i, ix) in indices.iter().enumerate() {
        let ring = ring_datum(*ix, spec, 3.0 + 0.1 * i as f64, 0.4, c(1.0, 0.2), c(-0.3, 0.5 * i as f64)).unwrap();
        let p = ring.channel(ix).unwrap().clone();
        f.insert(*ix, if i == 2 { ChannelProfile::zeros(r.len()) } else { p }).unwrap();
    }
    f
}

#[test]
fn unitarity_and_group_law_on_the_time_grid() {
    let spec = GridSpec::new(10.0, 16.0);
    for (u0, nu) in [
        (datum_3d(&spec), 0.5),
        (ring_datum(WaveIndex::new_2d(-1.5).unwrap(), &spec, 3.0, 0.4, c(0.0, 1.0), c(0.5, 0.0)).unwrap(), 0.25),
    ] {
        let p = Propagator::new(&u0, nu).unwrap();
        let traj = p.trajectory(&uniform_times(0.0, 1.0, 65)).unwrap();
        let drift = traj.states().iter().map(|u| (u.norm() / u0.norm() - 1.0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-3, "drift {drift:e}");
        assert!(rel_diff(&traj.states()[0], &u0) < 1e-3);
        for (t1, t2) in [(0.25, 0.75), (0.5, 0.5), (0.125, 0.3)] {
            let step = Propagator::new(&p.at(t1).unwrap(), nu).unwrap().at(t2).unwrap();
            let e = rel_diff(&step, &p.at(t1 + t2).unwrap());
            assert!(e < 1e-3, "composition ({t1},{t2}): {e:e}");
        }
    }
}

#[test]
fn flow_is_block_diagonal() {
    let spec = GridSpec::new(10.0, 16.0);
    let u0 = datum_3d(&spec);
    let u = Propagator::new(&u0, 0.5).unwrap().at(0.7).unwrap();
    assert!(u.channels().keys().eq(u0.channels().keys()));
    let zero = channel_indices(3, 2.0).unwrap()[2];
    let p = u.channel(&zero).unwrap();
    assert!(p.plus.iter().chain(&p.minus).all(|z| *z == c(0.0, 0.0)));
}

#[test]
fn free_flow_matches_the_bessel_route() {
    let spec = GridSpec::new(10.0, 16.0);
    let u0 = datum_3d(&spec);
    let kummer = Propagator::with_source(&u0, 0.0, KernelSource::Kummer).unwrap();
    let bessel = Propagator::with_source(&u0, 0.0, KernelSource::Bessel).unwrap();
    for t in [0.3, 1.0] {
        let e = rel_diff(&kummer.at(t).unwrap(), &bessel.at(t).unwrap());
        assert!(e < 1e-4, "t={t}: {e:e}");
    }
}

#[test]
fn bump_datum_is_recovered_and_linear() {
    // A compactly supported spectrum decays only like a smooth bump's
    // transform in r, so the r window must be wide.
    let spec = GridSpec::new(520.0, 2.0);
    let ix = WaveIndex::new_2d(0.5).unwrap();
    let nu = 0.25;
    let lo = |x: f64| (c(smooth_bump(0.5, 1.0, x), 0.0), c(0.0, 0.5 * smooth_bump(0.5, 1.0, x)));
    let hi = |x: f64| (c(0.0, 0.0), c(smooth_bump(1.0, 1.5, x), 0.0));
    let both = |x: f64| {
        let (a, b) = (lo(x), hi(x));
        (a.0 + b.0, a.1 + b.1)
    };
    let (u_lo, u_hi, u) = (
        band_limited_datum(ix, nu, lo, &spec).unwrap(),
        band_limited_datum(ix, nu, hi, &spec).unwrap(),
        band_limited_datum(ix, nu, both, &spec).unwrap(),
    );
    let sum = u_lo.combine(c(1.0, 0.0), &u_hi, c(1.0, 0.0)).unwrap();
    assert!(rel_diff(&sum, &u) < 1e-12);

    let t = Transformer::new(2, nu, &spec, &[ix]).unwrap();
    let g = t.forward(&u).unwrap();
    let mut want = SpectralField::new(2, t.rho_grid().clone()).unwrap();
    let (plus, minus) = t.rho_grid().nodes().iter().map(|&x| both(x)).unzip();
    want.insert(ix, ChannelProfile { plus, minus }).unwrap();
    let err = {
        let d = g.channel(&ix).unwrap();
        let w = want.channel(&ix).unwrap();
        let mut diff = SpectralField::new(2, t.rho_grid().clone()).unwrap();
        diff.insert(
            ix,
            ChannelProfile {
                plus: d.plus.iter().zip(&w.plus).map(|(a, b)| a - b).collect(),
                minus: d.minus.iter().zip(&w.minus).map(|(a, b)| a - b).collect(),
            },
        )
        .unwrap();
        diff.norm() / want.norm()
    };
    assert!(err < 1e-3, "recovery {err:e}");
}
