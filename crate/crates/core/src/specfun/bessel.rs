//! Bessel functions of the first kind `J_μ(x)` for real order `μ >= 0` and
//! `x >= 0`: ascending series in double-double below the crossover, Hankel's
//! asymptotic expansion above it.

use std::f64::consts::PI;

use super::dd::Dd;
use super::gamma::ln_gamma_real;
use crate::error::{Error, Result};

const MAX_TERMS: usize = 2000;

/// Argument above which the Hankel expansion replaces the series.
///
/// The asymptotic terms shrink until `j ≈ x`, with the smallest term of order
/// `e^{-2x}` once `x` is well beyond `μ²/2`; the double-double series loses about
/// `x / ln 10` digits to cancellation, which 32 digits absorb up to the crossover.
pub fn bessel_crossover(mu: f64) -> f64 {
    (20.0f64).max(0.6 * mu * mu + 10.0).min(60.0)
}

/// `J_μ(x)`.
pub fn bessel_j(mu: f64, x: f64) -> Result<f64> {
    if mu < 0.0 || !mu.is_finite() {
        return Err(Error::Domain(format!("bessel_j needs order >= 0, got {mu}")));
    }
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_j needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(if mu == 0.0 { 1.0 } else { 0.0 });
    }
    if x <= bessel_crossover(mu) {
        series(mu, x)
    } else {
        Ok(hankel(mu, x))
    }
}

fn series(mu: f64, x: f64) -> Result<f64> {
    // (x/2)^μ / Γ(μ+1) Σ (-x²/4)^m / (m! (μ+1)_m)
    let prefactor = (mu * (0.5 * x).ln() - ln_gamma_real(mu + 1.0)?).exp();
    let q = Dd::new(0.5 * x) * Dd::new(0.5 * x);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    for m in 1..MAX_TERMS {
        let mf = m as f64;
        let den = Dd::new(mf) * (Dd::new(mu) + Dd::new(mf));
        term = -(term * q) / den;
        sum = sum + term;
        if term.hi.abs() < 1e-33 * sum.hi.abs().max(1e-300) && mf * mf > 0.25 * x * x {
            return Ok(prefactor * sum.to_f64());
        }
    }
    Err(Error::NonConvergence { terms: MAX_TERMS, last_term: term.hi.abs() })
}

fn hankel(mu: f64, x: f64) -> f64 {
    // J = sqrt(2/(πx)) (P cos χ - Q sin χ), χ = x - (μ/2 + 1/4)π
    let m4 = 4.0 * mu * mu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let next = a * (m4 - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if next.abs() > prev && k > 2 {
            break;
        }
        a = next;
        prev = next.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * mu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
