//! Eigenfunctions against independent constructions.

use dirac_coulomb::eigen::{bound_campaign, channels_up_to, log_grid, log_log_slope};
use dirac_coulomb::specfun::bessel_j;
use dirac_coulomb::{eval_psi, make_channel, EnergySign, WaveIndex};

/// Free (`ν = 0`) eigenfunctions from Bessel functions:
/// `ψ_+ = ρ^{-(n-2)/2}/√2 (J_{k+1/2}, J_{k-1/2})` for `k > 0`,
/// `ψ_+ = ρ^{-(n-2)/2}/√2 (J_{|k|-1/2}, −J_{|k|+1/2})` for `k < 0`,
/// `ψ_- = −sgn(k) (F_+, −G_+)`.
fn free_psi(n: u8, k: f64, sign: EnergySign, rho: f64) -> (f64, f64) {
    let c = rho.powf(-(n as f64 - 2.0) / 2.0) / 2f64.sqrt();
    let ak = k.abs();
    let (f, g) = if k > 0.0 {
        (bessel_j(ak + 0.5, rho).unwrap(), bessel_j(ak - 0.5, rho).unwrap())
    } else {
        (bessel_j(ak - 0.5, rho).unwrap(), -bessel_j(ak + 0.5, rho).unwrap())
    };
    let (f, g) = (c * f, c * g);
    match sign {
        EnergySign::Plus => (f, g),
        EnergySign::Minus => (-k.signum() * f, k.signum() * g),
    }
}

fn ks(n: u8) -> Vec<f64> {
    let kmax = if n == 2 { 4.5 } else { 5.0 };
    let start = if n == 2 { 0.5 } else { 1.0 };
    let mut out = Vec::new();
    let mut k = start;
    while k <= kmax {
        out.push(k);
        out.push(-k);
        k += 1.0;
    }
    out
}

#[test]
fn zero_coupling_reduces_to_bessel() {
    let rhos = log_grid(0.1, 50.0, 40);
    let mut worst = 0.0f64;
    for n in [2u8, 3] {
        for k in ks(n) {
            let ch = make_channel(WaveIndex::from_parts(n, k, None).unwrap(), 0.0).unwrap();
            for sign in EnergySign::BOTH {
                for &rho in &rhos {
                    let s = eval_psi(&ch, sign, rho).unwrap();
                    let (f, g) = free_psi(n, k, sign, rho);
                    let err = (s.f - f).hypot(s.g - g) / f.hypot(g);
                    worst = worst.max(err);
                }
            }
        }
    }
    assert!(worst < 1e-6, "worst relative error {worst:e}");
}

#[test]
fn free_example_point() {
    let ch = make_channel(WaveIndex::new_3d(1, None).unwrap(), 0.0).unwrap();
    let s = eval_psi(&ch, EnergySign::Plus, 5.0).unwrap();
    let (f, g) = free_psi(3, 1.0, EnergySign::Plus, 5.0);
    assert!((s.f - f).abs() < 1e-12 && (s.g - g).abs() < 1e-12);
    assert!((s.f + 0.053_648_454).abs() < 1e-8);
}

#[test]
fn small_rho_exponent() {
    for &(n, k, nu) in &[(2u8, 0.5, 0.25), (3, 1.0, 0.5), (3, -2.0, 0.9), (2, -1.5, 0.45)] {
        let ch = make_channel(WaveIndex::from_parts(n, k, None).unwrap(), nu).unwrap();
        let expect = ch.gamma - (n as f64 - 1.0) / 2.0;
        for sign in EnergySign::BOTH {
            let s = log_log_slope(&ch, sign, 1e-7, 1e-5, 21).unwrap();
            assert!((s - expect).abs() <= 0.01 * expect.abs(), "{n} {k} {nu}: {s} vs {expect}");
        }
    }
}

/// Largest regime constant of the free 3D campaign (`|k| <= 5`, 60 points per
/// decade on `[1e-3, 60]`) from the reference run.
const FREE_3D_MAX_CONSTANT: f64 = 1.1489169731471027;

#[test]
fn bound_campaign_free_3d() {
    let grid = log_grid(1e-3, 60.0, 60);
    let chans = channels_up_to(3, 0.0, 5.0).unwrap();
    let c = bound_campaign(3, 0.0, &chans, &grid).unwrap();
    assert!(c.pass());
    assert!(c.upper_half_growth() <= 0.10);
    assert!(c.max_constant() <= 1.05 * FREE_3D_MAX_CONSTANT, "{}", c.max_constant());
    assert!(c.decay_constant > 0.3 && c.decay_constant < 0.8);
}

#[test]
fn bound_campaign_coupled() {
    for (n, nu, kmax) in [(2u8, 0.25, 4.5), (2, 0.45, 4.5), (3, 0.25, 5.0), (3, 0.9, 5.0)] {
        let top = 1.5 * 4.0 * f64::max(kmax, 2.0);
        let grid = log_grid(1e-3, top, 40);
        let chans = channels_up_to(n, nu, kmax).unwrap();
        let c = bound_campaign(n, nu, &chans, &grid).unwrap();
        for r in &c.reports {
            assert!(r.regime_constants.iter().all(|x| x.is_finite()), "{}", r.index);
        }
        assert!(c.upper_half_growth() <= 0.10, "n={n} nu={nu}: {}", c.upper_half_growth());
    }
}
