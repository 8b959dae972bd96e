//! Kummer's confluent hypergeometric function `1F1(a; b; z)` for complex
//! arguments.
//!
//! Below `|z| = HYP1F1_CROSSOVER` the Maclaurin series is summed in
//! double-double arithmetic, which absorbs the cancellation between terms of
//! size `~e^|z|`. Above it the two-sided large-`|z|` expansion is used,
//! truncated at its smallest term. If that truncation cannot reach
//! `ASYMPTOTIC_TARGET` the series is tried as a fallback.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dd::CDd;
use super::gamma::ln_gamma;
use crate::error::{Error, Result};

/// `|z|` above which the asymptotic expansion is preferred.
pub const HYP1F1_CROSSOVER: f64 = 30.0;
/// Relative accuracy the asymptotic branch must reach to be accepted.
pub const ASYMPTOTIC_TARGET: f64 = 1e-8;
const MAX_SERIES_TERMS: usize = 4000;
const MAX_ASYMPTOTIC_TERMS: usize = 200;
/// Largest cancellation the double-double series tolerates before giving up.
const MAX_CANCELLATION_DIGITS: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Series,
    Asymptotic,
}

/// How a value was obtained and how much the summation cancelled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesDiagnostics {
    pub method: Method,
    pub terms_used: usize,
    pub max_term_magnitude: f64,
    /// `log10(max term / |sum|)`, clamped at zero.
    pub cancellation_digits: f64,
    /// Magnitude of the first omitted term relative to the sum.
    pub truncation_estimate: f64,
}

fn is_nonpositive_integer(b: Complex64) -> bool {
    b.im == 0.0 && b.re <= 0.0 && b.re == b.re.round()
}

/// `1F1(a; b; z)` with diagnostics.
pub fn hyp1f1(a: Complex64, b: Complex64, z: Complex64) -> Result<(Complex64, SeriesDiagnostics)> {
    if is_nonpositive_integer(b) {
        return Err(Error::Domain(format!("1F1 undefined for b = {b}")));
    }
    if !(a.re.is_finite() && a.im.is_finite() && z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain("non-finite argument to 1F1".into()));
    }
    if z.norm() <= HYP1F1_CROSSOVER {
        return series(a, b, z);
    }
    match asymptotic(a, b, z) {
        Ok(r) if r.1.truncation_estimate <= ASYMPTOTIC_TARGET => Ok(r),
        other => {
            let s = series(a, b, z);
            match (s, other) {
                (Ok(s), _) if s.1.cancellation_digits <= MAX_CANCELLATION_DIGITS => Ok(s),
                (_, Ok(r)) => Err(Error::NonConvergence {
                    terms: r.1.terms_used,
                    last_term: r.1.truncation_estimate,
                }),
                (_, Err(e)) => Err(e),
            }
        }
    }
}

/// `d/dz 1F1(a; b; z) = (a/b) 1F1(a+1; b+1; z)`.
pub fn hyp1f1_derivative(
    a: Complex64,
    b: Complex64,
    z: Complex64,
) -> Result<(Complex64, SeriesDiagnostics)> {
    if is_nonpositive_integer(b) {
        return Err(Error::Domain(format!("1F1 undefined for b = {b}")));
    }
    let (m, d) = hyp1f1(a + 1.0, b + 1.0, z)?;
    Ok((a / b * m, d))
}

fn series(a: Complex64, b: Complex64, z: Complex64) -> Result<(Complex64, SeriesDiagnostics)> {
    let zd = CDd::from_c64(z);
    let ad = CDd::from_c64(a);
    let bd = CDd::from_c64(b);
    let mut term = CDd::ONE;
    let mut sum = CDd::ONE;
    let mut max_term = 1.0f64;
    let mut quiet = 0;
    let znorm = z.norm();
    for n in 0..MAX_SERIES_TERMS {
        let nf = n as f64;
        let num = ad.add_f64(nf) * zd;
        let den = bd.add_f64(nf) * CDd::from_c64(Complex64::new(nf + 1.0, 0.0));
        term = (term * num).div(den);
        sum = sum + term;
        let t = term.norm_f64();
        max_term = max_term.max(t);
        let s = sum.norm_f64();
        // Terms only decay for good once n exceeds |a| and |z|.
        if t <= 1e-33 * s || t == 0.0 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        let past_peak = nf > znorm && nf > a.norm();
        if (quiet >= 2 && past_peak) || t == 0.0 {
            let value = sum.to_c64();
            return Ok((value, diagnostics(Method::Series, n + 2, max_term, value, t / s.max(f64::MIN_POSITIVE))));
        }
    }
    Err(Error::NonConvergence { terms: MAX_SERIES_TERMS, last_term: term.norm_f64() })
}

fn diagnostics(
    method: Method,
    terms_used: usize,
    max_term: f64,
    value: Complex64,
    truncation_estimate: f64,
) -> SeriesDiagnostics {
    let v = value.norm();
    let cancellation_digits = if v > 0.0 { (max_term / v).log10().max(0.0) } else { f64::INFINITY };
    SeriesDiagnostics {
        method,
        terms_used,
        max_term_magnitude: max_term,
        cancellation_digits,
        truncation_estimate,
    }
}

/// Partial sum of `Σ (p)_s (q)_s / s! w^s`, truncated before the smallest
/// term. Returns the sum, terms used, largest term and the first omitted term.
fn asymptotic_sum(p: Complex64, q: Complex64, w: Complex64) -> (Complex64, usize, f64, f64) {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut max_term = 1.0f64;
    let mut prev = 1.0f64;
    for s in 0..MAX_ASYMPTOTIC_TERMS {
        let sf = s as f64;
        let next = term * (p + sf) * (q + sf) / ((sf + 1.0) * w);
        let t = next.norm();
        if t == 0.0 {
            return (sum, s + 1, max_term, 0.0);
        }
        if t > prev && s > 0 {
            return (sum, s + 1, max_term, prev);
        }
        sum += next;
        term = next;
        max_term = max_term.max(t);
        prev = t;
        if t < 1e-17 * sum.norm() {
            return (sum, s + 2, max_term, t);
        }
    }
    (sum, MAX_ASYMPTOTIC_TERMS, max_term, prev)
}

/// Reciprocal gamma as a log, or `None` at a pole (where `1/Γ = 0`).
fn ln_rgamma(z: Complex64) -> Option<Complex64> {
    ln_gamma(z).ok().map(|l| -l)
}

fn asymptotic(a: Complex64, b: Complex64, z: Complex64) -> Result<(Complex64, SeriesDiagnostics)> {
    let lgb = ln_gamma(b)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut terms = 0;
    let mut max_term = 0.0f64;
    let mut err = 0.0f64;
    if let Some(lrga) = ln_rgamma(a) {
        let (s1, n1, m1, e1) = asymptotic_sum(b - a, 1.0 - a, z);
        let pre = (lgb + lrga + z + (a - b) * z.ln()).exp();
        value += pre * s1;
        terms += n1;
        max_term = max_term.max(m1 * pre.norm());
        err += e1 * pre.norm();
    }
    if let Some(lrgba) = ln_rgamma(b - a) {
        let (s2, n2, m2, e2) = asymptotic_sum(a, a - b + 1.0, -z);
        let pre = (lgb + lrgba - a * (-z).ln()).exp();
        value += pre * s2;
        terms += n2;
        max_term = max_term.max(m2 * pre.norm());
        err += e2 * pre.norm();
    }
    let v = value.norm();
    let rel_err = if v > 0.0 { err / v } else { f64::INFINITY };
    Ok((value, diagnostics(Method::Asymptotic, terms, max_term, value, rel_err)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn zero_argument_is_one() {
        let (v, d) = hyp1f1(c(0.7, 0.2), c(2.1, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(v, c(1.0, 0.0));
        assert!(d.terms_used <= 2);
    }

    #[test]
    fn elementary_closed_form() {
        // 1F1(1; 2; z) = (e^z - 1)/z
        let z = 0.7;
        let (v, _) = hyp1f1(c(1.0, 0.0), c(2.0, 0.0), c(z, 0.0)).unwrap();
        assert!((v.re - 1.448_218_153_529_252_1).abs() < 1e-15);
        assert!(((v.re - (z.exp() - 1.0) / z) / v.re).abs() < 1e-15);
    }

    #[test]
    fn exponential_when_a_equals_b() {
        for &z in &[c(3.0, -4.0), c(0.0, -25.0), c(0.0, 60.0), c(-20.0, 5.0)] {
            let (v, _) = hyp1f1(c(1.3, 0.4), c(1.3, 0.4), z).unwrap();
            assert!(rel(v, z.exp()) < 1e-10, "z = {z}");
        }
    }

    #[test]
    fn mpmath_reference_values() {
        // (a, b, z) -> 1F1, frozen from a 30-digit evaluation.
        let cases = [
            ((0.866_025_403_784_438_6, -0.5), (2.732_050_807_568_877, 0.0), (0.0, -10.0),
             (0.101_750_560_217_905_6, -0.040_079_048_665_756_181)),
            ((0.866_025_403_784_438_6, -0.5), (2.732_050_807_568_877, 0.0), (0.0, -60.0),
             (0.020_280_321_284_530_044, 0.011_946_506_580_374_706)),
            ((2.0, 0.3), (5.0, 0.0), (0.0, 80.0),
             (-0.000_540_057_349_371_187, 0.001_082_386_047_510_93)),
            ((1.0, 0.5), (3.0, 0.0), (-45.0, 10.0),
             (0.003_578_444_790_735_48, -0.040_843_659_358_220_3)),
        ];
        for ((ar, ai), (br, bi), (zr, zi), (vr, vi)) in cases {
            let (v, _) = hyp1f1(c(ar, ai), c(br, bi), c(zr, zi)).unwrap();
            assert!(rel(v, c(vr, vi)) < 1e-12, "z = {zr}+{zi}i: {v}");
        }
    }

    #[test]
    fn both_branches_agree_near_crossover() {
        let a = c(1.9, -0.7);
        let b = c(4.8, 0.0);
        for &r in &[26.0, 30.0, 36.0, 44.0] {
            let z = c(0.0, -r);
            let (s, _) = series(a, b, z).unwrap();
            let (x, d) = asymptotic(a, b, z).unwrap();
            assert!(d.truncation_estimate < 1e-9);
            assert!(rel(s, x) < 1e-10, "|z| = {r}: {s} vs {x}");
        }
    }

    #[test]
    fn diagnostics_report_cancellation() {
        let (_, d) = hyp1f1(c(0.5, 0.0), c(1.5, 0.0), c(-25.0, 0.0)).unwrap();
        assert_eq!(d.method, Method::Series);
        assert!(d.cancellation_digits > 8.0);
        assert!(d.max_term_magnitude > 1e8);
    }

    #[test]
    fn pole_in_b_is_domain_error() {
        assert!(matches!(hyp1f1(c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let a = c(0.9, -0.3);
        let b = c(2.8, 0.0);
        let z = c(0.0, -7.0);
        let h = 1e-5;
        let (p, _) = hyp1f1(a, b, z + h).unwrap();
        let (m, _) = hyp1f1(a, b, z - h).unwrap();
        let (d, _) = hyp1f1_derivative(a, b, z).unwrap();
        assert!(rel((p - m) / (2.0 * h), d) < 1e-8);
    }

    proptest! {
        #[test]
        fn kummer_transformation(ar in 0.1f64..4.0, ai in -2.0f64..2.0, br in 0.5f64..9.0,
                                 zr in -20.0f64..20.0, zi in -40.0f64..40.0) {
            let (a, b, z) = (c(ar, ai), c(br, 0.0), c(zr, zi));
            let (lhs, _) = hyp1f1(a, b, z).unwrap();
            let (m, _) = hyp1f1(b - a, b, -z).unwrap();
            let rhs = z.exp() * m;
            prop_assert!(rel(lhs, rhs) < 1e-10, "{lhs} vs {rhs}");
        }

        #[test]
        fn conjugate_symmetry(ar in 0.1f64..4.0, ai in -2.0f64..2.0, br in 0.5f64..9.0,
                              zr in -20.0f64..20.0, zi in -60.0f64..60.0) {
            let (a, b, z) = (c(ar, ai), c(br, 0.0), c(zr, zi));
            let (x, _) = hyp1f1(a.conj(), b.conj(), z.conj()).unwrap();
            let (y, _) = hyp1f1(a, b, z).unwrap();
            prop_assert!(rel(x, y.conj()) < 1e-13);
        }

        #[test]
        fn contiguous_relation(ar in 0.1f64..4.0, ai in -2.0f64..2.0, br in 0.5f64..9.0,
                               zi in -50.0f64..50.0) {
            // b(b-1)M(a,b-1) + b(1-b-z)M(a,b) + z(b-a)M(a,b+1) = 0
            let (a, b, z) = (c(ar, ai), c(br + 1.0, 0.0), c(0.0, zi));
            let (m0, _) = hyp1f1(a, b - 1.0, z).unwrap();
            let (m1, _) = hyp1f1(a, b, z).unwrap();
            let (m2, _) = hyp1f1(a, b + 1.0, z).unwrap();
            let t = [b * (b - 1.0) * m0, b * (1.0 - b - z) * m1, z * (b - a) * m2];
            let scale = t.iter().map(|x| x.norm()).fold(0.0, f64::max);
            prop_assert!((t[0] + t[1] + t[2]).norm() < 1e-10 * scale);
        }
    }
}
