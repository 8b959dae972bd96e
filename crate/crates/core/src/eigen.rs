//! Generalized eigenfunctions of the radial Dirac–Coulomb operators.
//!
//! For a channel `(n, k, ν)` with `γ = √(k² − ν²)` the literal closed form is
//!
//! ```text
//! w(ρ) = c (2ρ)^{γ-(n-1)/2} e^{i(ρ+ξ)} 1F1(γ - iν; 2γ+1; -2iρ),
//! c    = √2 |Γ(γ+1+iν)| e^{πν/2} / Γ(2γ+1),    e^{-2iξ} = (γ - iν)/k.
//! ```
//!
//! Conventions fixed here (checked against the radial operator `d_{ν,k}` of
//! [`crate::partialwave::apply_radial_dirac`]):
//!
//! * positive energy: `(F, G) = κ_n (Im w, Re w)`;
//! * negative energy: `(F, G) = κ_n (Re w, Im w)` with `w` built from `(−k, −ν)`;
//! * `κ_n = 2^{(n-2)/2} / √π`, which makes the distorted Hankel transform an
//!   isometry of `L²(r^{n-1} dr)` onto `L²(ρ^{n-1} dρ)` for each energy sign.
//!
//! With these choices `d_{ν,k} ψ_± = ±ψ_±` and, at `ν = 0`,
//! `ψ_+ = ρ^{-(n-2)/2}/√2 · (J_{k+1/2}, J_{k-1/2})` for `k > 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{hyp1f1, hyp1f1_derivative, ln_gamma, ln_gamma_real, Method};

/// Partial-wave label: `n`, `k` and (3D only, optionally) `m_k`.
///
/// Half-integers are stored doubled so indices compare exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveIndex {
    pub n: u8,
    two_k: i32,
    two_m: Option<i32>,
}

impl WaveIndex {
    /// 2D channel, `k ∈ ℤ + 1/2`.
    pub fn new_2d(k: f64) -> Result<Self> {
        let two_k = (2.0 * k).round();
        if (2.0 * k - two_k).abs() > 1e-12 || (two_k as i64).rem_euclid(2) != 1 {
            return Err(Error::InvalidChannel(format!("2D requires k in Z + 1/2, got {k}")));
        }
        Ok(WaveIndex { n: 2, two_k: two_k as i32, two_m: None })
    }

    /// 3D channel, `k ∈ ℤ \ {0}`, optional `m_k ∈ ℤ + 1/2` with `|m_k| <= |k| - 1/2`.
    pub fn new_3d(k: i32, m: Option<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidChannel("3D requires k != 0".into()));
        }
        let two_m = match m {
            None => None,
            Some(m) => {
                let t = (2.0 * m).round();
                if (2.0 * m - t).abs() > 1e-12 || (t as i64).rem_euclid(2) != 1 {
                    return Err(Error::InvalidChannel(format!("m_k must be in Z + 1/2, got {m}")));
                }
                if t.abs() > (2 * k.abs() - 1) as f64 {
                    return Err(Error::InvalidChannel(format!("|m_k| > |k| - 1/2 for k = {k}, m = {m}")));
                }
                Some(t as i32)
            }
        };
        Ok(WaveIndex { n: 3, two_k: 2 * k, two_m })
    }

    /// Builds an index from `(n, k, m)` as read from files or the command line.
    pub fn from_parts(n: u8, k: f64, m: Option<f64>) -> Result<Self> {
        match n {
            2 => {
                if m.is_some() {
                    return Err(Error::InvalidChannel("2D channels carry no m_k".into()));
                }
                Self::new_2d(k)
            }
            3 => {
                if k.fract() != 0.0 {
                    return Err(Error::InvalidChannel(format!("3D requires integer k, got {k}")));
                }
                Self::new_3d(k as i32, m)
            }
            _ => Err(Error::DimensionMismatch(format!("n must be 2 or 3, got {n}"))),
        }
    }

    pub fn k(&self) -> f64 {
        self.two_k as f64 / 2.0
    }

    pub fn two_k(&self) -> i32 {
        self.two_k
    }

    pub fn m(&self) -> Option<f64> {
        self.two_m.map(|t| t as f64 / 2.0)
    }

    pub fn two_m(&self) -> Option<i32> {
        self.two_m
    }

    /// Lowest channels: `|k| = 1/2` in 2D, `|k| = 1` in 3D.
    pub fn is_dirac_radial(&self) -> bool {
        self.two_k.abs() == self.n as i32 - 1
    }
}

impl std::fmt::Display for WaveIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.m() {
            Some(m) => write!(f, "(n={}, k={}, m={})", self.n, self.k(), m),
            None => write!(f, "(n={}, k={})", self.n, self.k()),
        }
    }
}

/// Energy sign `ε/|ε|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnergySign {
    Plus,
    Minus,
}

impl EnergySign {
    pub fn value(self) -> f64 {
        match self {
            EnergySign::Plus => 1.0,
            EnergySign::Minus => -1.0,
        }
    }

    pub const BOTH: [EnergySign; 2] = [EnergySign::Plus, EnergySign::Minus];
}

/// Parameters of the literal formula for one sign of `(k, ν)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Branch {
    a: Complex64,
    b: Complex64,
    power: f64,
    xi: f64,
    /// Literal prefactor times `κ_n`.
    scale: f64,
}

/// A channel `(n, k, ν)` with its derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenChannel {
    pub index: WaveIndex,
    pub nu: f64,
    pub gamma: f64,
    /// Phase shift, `e^{-2iξ} = (γ − iν)/k`.
    pub xi: f64,
    /// `√2 |Γ(γ+1+iν)| e^{πν/2} / Γ(2γ+1)` (literal, without `κ_n`).
    pub norm_prefactor: f64,
    branches: [Branch; 2],
}

/// Normalization `κ_n = 2^{(n-2)/2}/√π` applied on top of the literal formula.
pub fn normalization(n: u8) -> f64 {
    2f64.powf((n as f64 - 2.0) / 2.0) / PI.sqrt()
}

/// `ξ = −½ arg((γ − iν)/|k|)`, plus `π/2` when `k < 0`; continuous in `ν`.
fn phase_shift(gamma: f64, nu: f64, k: f64) -> f64 {
    let base = -0.5 * Complex64::new(gamma, -nu).arg();
    if k < 0.0 {
        base + 0.5 * PI
    } else {
        base
    }
}

fn literal_prefactor(gamma: f64, nu: f64) -> Result<f64> {
    let lg = ln_gamma(Complex64::new(gamma + 1.0, nu))?.re;
    let lg2 = ln_gamma_real(2.0 * gamma + 1.0)?;
    Ok(2f64.sqrt() * (lg - lg2 + 0.5 * PI * nu).exp())
}

/// Builds the channel; requires `|ν| <= (n−1)/2` and `γ > 0`.
pub fn make_channel(index: WaveIndex, nu: f64) -> Result<EigenChannel> {
    let n = index.n;
    let limit = (n as f64 - 1.0) / 2.0;
    if !nu.is_finite() || nu.abs() > limit {
        return Err(Error::CouplingOutOfRange {
            nu,
            reason: format!("|nu| must not exceed (n-1)/2 = {limit}"),
        });
    }
    let k = index.k();
    let g2 = k * k - nu * nu;
    if g2 <= 0.0 {
        return Err(Error::CouplingOutOfRange { nu, reason: format!("gamma = sqrt(k^2 - nu^2) not positive for k = {k}") });
    }
    let gamma = g2.sqrt();
    let power = gamma - (n as f64 - 1.0) / 2.0;
    let kappa = normalization(n);
    let branch = |kk: f64, vv: f64| -> Result<Branch> {
        Ok(Branch {
            a: Complex64::new(gamma, -vv),
            b: Complex64::new(2.0 * gamma + 1.0, 0.0),
            power,
            xi: phase_shift(gamma, vv, kk),
            scale: kappa * literal_prefactor(gamma, vv)?,
        })
    };
    let plus = branch(k, nu)?;
    let minus = branch(-k, -nu)?;
    Ok(EigenChannel {
        index,
        nu,
        gamma,
        xi: plus.xi,
        norm_prefactor: plus.scale / kappa,
        branches: [plus, minus],
    })
}

/// Values and `ρ`-derivatives of `ψ = (F, G)` at scaled radius `ρ = |ε| r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSample {
    pub rho: f64,
    pub f: f64,
    pub g: f64,
    pub f_prime: f64,
    pub g_prime: f64,
    /// False when the underlying 1F1 evaluation lost more than 20 digits or
    /// its asymptotic truncation estimate exceeded `1e-8`.
    pub confident: bool,
}

impl EigenSample {
    pub fn modulus(&self) -> f64 {
        self.f.hypot(self.g)
    }

    pub fn derivative_modulus(&self) -> f64 {
        self.f_prime.hypot(self.g_prime)
    }
}

impl EigenChannel {
    pub fn k(&self) -> f64 {
        self.index.k()
    }

    pub fn n(&self) -> u8 {
        self.index.n
    }

    fn branch(&self, sign: EnergySign) -> &Branch {
        match sign {
            EnergySign::Plus => &self.branches[0],
            EnergySign::Minus => &self.branches[1],
        }
    }

    fn arrange(sign: EnergySign, w: Complex64) -> (f64, f64) {
        match sign {
            EnergySign::Plus => (w.im, w.re),
            EnergySign::Minus => (w.re, w.im),
        }
    }

    /// `(F, G)` at `ρ`, without derivatives.
    pub fn value(&self, sign: EnergySign, rho: f64) -> Result<(f64, f64)> {
        check_rho(rho)?;
        let br = self.branch(sign);
        let (m, _) = hyp1f1(br.a, br.b, Complex64::new(0.0, -2.0 * rho))?;
        let phase = Complex64::from_polar(br.scale * (2.0 * rho).powf(br.power), rho + br.xi);
        Ok(Self::arrange(sign, phase * m))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("rho must be positive and finite, got {rho}")));
    }
    Ok(())
}

/// `ψ_{k,ε}` and its derivative at scaled radius `ρ`.
pub fn eval_psi(channel: &EigenChannel, sign: EnergySign, rho: f64) -> Result<EigenSample> {
    check_rho(rho)?;
    let br = channel.branch(sign);
    let z = Complex64::new(0.0, -2.0 * rho);
    let (m, d1) = hyp1f1(br.a, br.b, z)?;
    let (mp, d2) = hyp1f1_derivative(br.a, br.b, z)?;
    let phase = Complex64::from_polar(br.scale * (2.0 * rho).powf(br.power), rho + br.xi);
    let w = phase * m;
    let dw = phase * ((br.power / rho + Complex64::i()) * m - 2.0 * Complex64::i() * mp);
    let (f, g) = EigenChannel::arrange(sign, w);
    let (f_prime, g_prime) = EigenChannel::arrange(sign, dw);
    let confident = [d1, d2].iter().all(|d| match d.method {
        Method::Series => d.cancellation_digits <= 20.0,
        Method::Asymptotic => d.truncation_estimate <= 1e-8,
    });
    Ok(EigenSample { rho, f, g, f_prime, g_prime, confident })
}

/// `ψ_{k,ε}(r)` for energy `|ε|` and radius `r`; evaluated through `ρ = |ε| r`,
/// so the result depends on the product only. Derivatives are in `r`.
pub fn eval_psi_at(channel: &EigenChannel, sign: EnergySign, energy: f64, r: f64) -> Result<EigenSample> {
    let mut s = eval_psi(channel, sign, energy.abs() * r)?;
    s.f_prime *= energy.abs();
    s.g_prime *= energy.abs();
    Ok(s)
}

/// Least-squares slope of `ln|ψ|` against `ln ρ` over `[rho_lo, rho_hi]`.
pub fn log_log_slope(channel: &EigenChannel, sign: EnergySign, rho_lo: f64, rho_hi: f64, samples: usize) -> Result<f64> {
    let mut xs = Vec::with_capacity(samples);
    let mut ys = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        let rho = rho_lo * (rho_hi / rho_lo).powf(t);
        let (f, g) = channel.value(sign, rho)?;
        xs.push(rho.ln());
        ys.push(f.hypot(g).ln());
    }
    Ok(least_squares_slope(&xs, &ys))
}

/// Slope of the ordinary least-squares line through `(x, y)`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Minimal constants making the pointwise bounds hold on a sampled grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub index: WaveIndex,
    pub nu: f64,
    /// Minimal `C` for `|ψ|` in the small, transition and oscillatory regimes.
    pub regime_constants: [f64; 3],
    /// Same for `|ψ'|`.
    pub derivative_constants: [f64; 3],
    /// Number of grid points in each regime.
    pub regime_counts: [usize; 3],
    pub decay_constant: f64,
    /// Samples skipped because the special-function evaluation was not confident.
    pub excluded: usize,
    pub pass: bool,
    pub grid_spec: String,
}

impl BoundReport {
    pub fn max_constant(&self) -> f64 {
        self.regime_constants.iter().cloned().fold(0.0, f64::max)
    }
}

/// Regime of `ρ` for channel index `|k|`: `0` if `ρ <= max(|k|/2, 2)`, else `1`
/// if `ρ <= 2|k|`, else `2`.
pub fn regime(abs_k: f64, rho: f64) -> usize {
    if rho <= (abs_k / 2.0).max(2.0) {
        0
    } else if rho <= 2.0 * abs_k {
        1
    } else {
        2
    }
}

/// Bound envelopes (without `C`) for value and derivative.
fn envelopes(n: u8, gamma: f64, abs_k: f64, decay: f64, rho: f64) -> (f64, f64) {
    let nf = n as f64;
    match regime(abs_k, rho) {
        0 => {
            let base = (rho / 2.0).min(1.0);
            let e = (-decay * abs_k).exp();
            (base.powf(gamma - (nf - 1.0) / 2.0) * e, base.powf(gamma - (nf + 1.0) / 2.0) * e)
        }
        1 => {
            let v = abs_k.powf(-(2.0 * nf - 3.0) / 4.0) * ((abs_k - rho).abs() + abs_k.cbrt()).powf(-0.25);
            (v, v)
        }
        _ => {
            let v = rho.powf(-(nf - 1.0) / 2.0);
            (v, v)
        }
    }
}

/// Samples of `|ψ|` for both energy signs: `(ρ, |ψ|, |ψ'|, confident)`.
fn sample_both_signs(channel: &EigenChannel, rho_grid: &[f64]) -> Result<Vec<(f64, f64, f64, bool)>> {
    rho_grid
        .par_iter()
        .map(|&rho| {
            let p = eval_psi(channel, EnergySign::Plus, rho)?;
            let m = eval_psi(channel, EnergySign::Minus, rho)?;
            Ok((
                rho,
                p.modulus().max(m.modulus()),
                p.derivative_modulus().max(m.derivative_modulus()),
                p.confident && m.confident,
            ))
        })
        .collect()
}

/// Minimal constants on `rho_grid` with decay constant `decay` in the first
/// regime. Regimes absent from the grid report a constant of 0.
pub fn verify_pointwise_bounds(channel: &EigenChannel, rho_grid: &[f64], decay: f64) -> Result<BoundReport> {
    let abs_k = channel.k().abs();
    let samples = sample_both_signs(channel, rho_grid)?;
    let mut c = [0.0f64; 3];
    let mut cd = [0.0f64; 3];
    let mut counts = [0usize; 3];
    let mut excluded = 0;
    for (rho, v, dv, ok) in samples {
        if !ok {
            excluded += 1;
            continue;
        }
        let r = regime(abs_k, rho);
        let (ev, ed) = envelopes(channel.n(), channel.gamma, abs_k, decay, rho);
        c[r] = c[r].max(v / ev);
        cd[r] = cd[r].max(dv / ed);
        counts[r] += 1;
    }
    let pass = c.iter().chain(cd.iter()).all(|x| x.is_finite());
    let lo = rho_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rho_grid.iter().cloned().fold(0.0, f64::max);
    Ok(BoundReport {
        index: channel.index,
        nu: channel.nu,
        regime_constants: c,
        derivative_constants: cd,
        regime_counts: counts,
        decay_constant: decay,
        excluded,
        pass,
        grid_spec: format!("{} log-spaced points on [{lo:e}, {hi:e}]", rho_grid.len()),
    })
}

/// `sup_{ρ in regime 0} |ψ| / min(ρ/2, 1)^{γ-(n-1)/2}`, the regime-0 constant with `D = 0`.
fn regime0_sup(channel: &EigenChannel, rho_grid: &[f64]) -> Result<f64> {
    let r = verify_pointwise_bounds(channel, rho_grid, 0.0)?;
    Ok(r.regime_constants[0])
}

/// Fits `D` by least squares of `ln sup_0(k) = ln C − D|k|` over the given
/// channels, where `sup_0(k)` is the first-regime constant with `D = 0`.
pub fn fit_decay_constant_over(channels: &[EigenChannel], rho_grid: &[f64]) -> Result<f64> {
    if channels.len() < 2 {
        return Ok(0.0);
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ch in channels {
        xs.push(ch.k().abs());
        ys.push(regime0_sup(ch, rho_grid)?.ln());
    }
    Ok(-least_squares_slope(&xs, &ys))
}

/// Channel magnitudes used to fit `D`: the first regime ends at `|k|/2` (not
/// at the fixed `ρ = 2`) once `|k| > 4`, which is where its exponential form
/// is meaningful.
pub fn decay_fit_ks(n: u8) -> Vec<f64> {
    let start = if n == 2 { 4.5 } else { 5.0 };
    (0..6).map(|i| start + i as f64).collect()
}

/// Fits the global `D` for `(n, ν)` on the large-`|k|` channels of
/// [`decay_fit_ks`], sampling the first regime with `per_decade` points.
pub fn fit_decay_constant(n: u8, nu: f64, per_decade: usize) -> Result<f64> {
    let ks = decay_fit_ks(n);
    let top = ks.iter().cloned().fold(0.0, f64::max) / 2.0;
    let grid = log_grid(1e-3, top, per_decade);
    let mut chans = Vec::new();
    for k in ks {
        for s in [1.0, -1.0] {
            chans.push(make_channel(WaveIndex::from_parts(n, s * k, None)?, nu)?);
        }
    }
    fit_decay_constant_over(&chans, &grid)
}

/// Log-spaced grid with `per_decade` points per decade.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let count = ((decades * per_decade as f64).ceil() as usize).max(1) + 1;
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Result of a bound campaign over a set of channels sharing `(n, ν)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCampaign {
    pub n: u8,
    pub nu: f64,
    pub decay_constant: f64,
    pub reports: Vec<BoundReport>,
}

impl BoundCampaign {
    fn upper_half(&self) -> (f64, Vec<(f64, f64)>) {
        let kmax = self.reports.iter().map(|r| r.index.k().abs()).fold(0.0, f64::max);
        let top: Vec<(f64, f64)> = self
            .reports
            .iter()
            .filter(|r| r.index.k().abs() >= kmax / 2.0)
            .map(|r| (r.index.k().abs(), r.max_constant()))
            .collect();
        let k_ref = top.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
        (k_ref, top)
    }

    /// Growth of the per-channel constant over the upper half of the `|k|`
    /// range: `max_{|k| >= k_ref} C(k) / C(k_ref) − 1`, with `k_ref` the
    /// smallest tested `|k| >= k_max/2` (both signs of `k` at `k_ref` count).
    pub fn upper_half_growth(&self) -> f64 {
        let (k_ref, top) = self.upper_half();
        let base = top.iter().filter(|t| t.0 == k_ref).map(|t| t.1).fold(0.0, f64::max);
        let hi = top.iter().map(|t| t.1).fold(0.0, f64::max);
        hi / base - 1.0
    }

    /// `max/min − 1` of the per-channel constant over the upper half.
    pub fn upper_half_spread(&self) -> f64 {
        let (_, top) = self.upper_half();
        let hi = top.iter().map(|t| t.1).fold(0.0, f64::max);
        let lo = top.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        hi / lo - 1.0
    }

    pub fn max_constant(&self) -> f64 {
        self.reports.iter().map(|r| r.max_constant()).fold(0.0, f64::max)
    }

    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// All channels `±|k|` for `|k|` up to `k_max` (`|k| >= 1/2` in 2D, `>= 1` in 3D).
pub fn channels_up_to(n: u8, nu: f64, k_max: f64) -> Result<Vec<EigenChannel>> {
    let mut out = Vec::new();
    let start = if n == 2 { 0.5 } else { 1.0 };
    let mut k = start;
    while k <= k_max + 1e-12 {
        for s in [1.0, -1.0] {
            out.push(make_channel(WaveIndex::from_parts(n, s * k, None)?, nu)?);
        }
        k += 1.0;
    }
    Ok(out)
}

/// Runs the bound verification over `channels` with the decay constant
/// from [`fit_decay_constant`].
pub fn bound_campaign(n: u8, nu: f64, channels: &[EigenChannel], rho_grid: &[f64]) -> Result<BoundCampaign> {
    let decay = fit_decay_constant(n, nu, 40)?.max(0.0);
    let reports = channels
        .par_iter()
        .map(|c| verify_pointwise_bounds(c, rho_grid, decay))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCampaign { n, nu, decay_constant: decay, reports })
}
