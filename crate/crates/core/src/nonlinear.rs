//! The Hartree nonlinearity `N(u) = (ω ∗ ⟨βu, u⟩) u` on Dirac-radial 3D
//! fields and the Picard iteration of the Duhamel map
//!
//! ```text
//! Φ(u)(t) = e^{itD_ν} u₀ − i ∫₀^t e^{i(t−s)D_ν} N(u(s)) ds.
//! ```
//!
//! Iterates are carried in the interaction picture `v(t) = e^{−itD_ν} u(t)`,
//! whose spectrum varies only through the nonlinearity; the flow itself is
//! applied exactly as a phase.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::hankel::{check_tails_of, KernelSource, SpectralField, Transformer};
use crate::norms::{admissibility, mixed_norm, RadialClass};
use crate::partialwave::{ChannelMap, ChannelProfile, PartialWaveField};
use crate::propagator::{uniform_times, Provenance, Trajectory};
use crate::quadrature::{gauss_legendre, gregory_weights};
use crate::specfun::gamma_real;

/// Shape of a radial convolution kernel `ω(|x|)` on `ℝ³`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum KernelKind {
    /// `c e^{−bt}/t`.
    Yukawa { b: f64, c: f64 },
    /// `(1 + t²)^{−α/2}`.
    Bracket { alpha: f64 },
    /// Piecewise-linear samples `ω(t_i)` from `t_0 = 0`; zero beyond the last
    /// node.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

/// A radially symmetric kernel with its `L^p(ℝ³)` norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionKernel {
    kind: KernelKind,
    /// Caller-supplied `(p, ‖ω‖_p)` for tabulated kernels.
    supplied_norms: Vec<(f64, f64)>,
    /// `W(t_i) = ∫₀^{t_i} τ ω(τ) dτ` at the table nodes.
    cumulative: Vec<f64>,
}

impl ConvolutionKernel {
    /// Yukawa kernel `c e^{−bt}/t`, `b > 0`.
    pub fn yukawa(b: f64, c: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite() && c.is_finite()) {
            return Err(Error::Domain(format!("yukawa kernel needs b > 0 and finite c (got b={b}, c={c})")));
        }
        Ok(Self::named(KernelKind::Yukawa { b, c }))
    }

    /// Bracket kernel `⟨t⟩^{−α}`, `α > 0`.
    pub fn bracket(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("bracket kernel needs alpha > 0 (got {alpha})")));
        }
        Ok(Self::named(KernelKind::Bracket { alpha }))
    }

    /// The zero kernel.
    pub fn zero() -> Self {
        Self::named(KernelKind::Yukawa { b: 1.0, c: 0.0 })
    }

    /// Tabulated kernel; `radii` start at 0 and increase strictly, `norms`
    /// lists the known `(p, ‖ω‖_{L^p})`.
    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>, norms: Vec<(f64, f64)>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(Error::Domain("a kernel table needs at least two (t, ω) pairs".into()));
        }
        if radii[0] != 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("kernel table radii must start at 0 and increase; values must be finite".into()));
        }
        if norms.iter().any(|(p, v)| !(*p >= 1.0) || !(*v >= 0.0)) {
            return Err(Error::Domain("kernel norms need p >= 1 and nonnegative values".into()));
        }
        let mut cumulative = vec![0.0; radii.len()];
        for i in 1..radii.len() {
            cumulative[i] = cumulative[i - 1] + cell_moment(radii[i - 1], radii[i], values[i - 1], values[i], radii[i]);
        }
        Ok(ConvolutionKernel { kind: KernelKind::Tabulated { radii, values }, supplied_norms: norms, cumulative })
    }

    fn named(kind: KernelKind) -> Self {
        ConvolutionKernel { kind, supplied_norms: Vec::new(), cumulative: Vec::new() }
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    /// `ω(t)`.
    pub fn value(&self, t: f64) -> f64 {
        match &self.kind {
            KernelKind::Yukawa { b, c } => c * (-b * t).exp() / t,
            KernelKind::Bracket { alpha } => (1.0 + t * t).powf(-alpha / 2.0),
            KernelKind::Tabulated { radii, values } => {
                if t >= radii[radii.len() - 1] {
                    return 0.0;
                }
                let i = radii.partition_point(|&x| x <= t) - 1;
                let f = (t - radii[i]) / (radii[i + 1] - radii[i]);
                values[i] + f * (values[i + 1] - values[i])
            }
        }
    }

    /// Radius beyond which `ω` vanishes, if any.
    pub fn support(&self) -> Option<f64> {
        match &self.kind {
            KernelKind::Tabulated { radii, .. } => Some(radii[radii.len() - 1]),
            _ => None,
        }
    }

    /// `‖ω‖_{L^p(ℝ³)}` (`p = ∞` allowed): closed forms for the named kernels,
    /// the supplied values for tables.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("p = {p} must be at least 1")));
        }
        match &self.kind {
            KernelKind::Yukawa { b, c } => {
                if *c == 0.0 {
                    return Ok(0.0);
                }
                if p >= 3.0 {
                    return Err(Error::KernelNotInLp { p });
                }
                // 4π |c|^p Γ(3−p) / (pb)^{3−p}
                let integral = 4.0 * PI * c.abs().powf(p) * gamma_real(3.0 - p)? / (p * b).powf(3.0 - p);
                Ok(integral.powf(1.0 / p))
            }
            KernelKind::Bracket { alpha } => {
                if p.is_infinite() {
                    return Ok(1.0);
                }
                let a = alpha * p / 2.0;
                if a <= 1.5 {
                    return Err(Error::KernelNotInLp { p });
                }
                // 4π ∫ t² (1+t²)^{−a} dt = 2π Γ(3/2) Γ(a − 3/2) / Γ(a)
                let integral = 2.0 * PI * gamma_real(1.5)? * gamma_real(a - 1.5)? / gamma_real(a)?;
                Ok(integral.powf(1.0 / p))
            }
            KernelKind::Tabulated { .. } => self
                .supplied_norms
                .iter()
                .find(|(q, _)| *q == p)
                .map(|(_, v)| *v)
                .ok_or(Error::KernelNotInLp { p }),
        }
    }

    /// `∫_{|r−s|}^{r+s} τ ω(τ) dτ`, evaluated without cancellation for
    /// `r ≪ s` or `s ≪ r`.
    pub fn shell(&self, r: f64, s: f64) -> f64 {
        let lo = (r - s).abs();
        let hi = r + s;
        let width = 2.0 * r.min(s);
        match &self.kind {
            KernelKind::Yukawa { b, c } => -c / b * (-b * lo).exp() * (-b * width).exp_m1(),
            KernelKind::Bracket { alpha } => {
                // (1+hi²) − (1+lo²) = 4rs.
                let x = 4.0 * r * s / (1.0 + lo * lo);
                if (alpha - 2.0).abs() < 1e-12 {
                    0.5 * x.ln_1p()
                } else {
                    let e = 1.0 - alpha / 2.0;
                    (1.0 + lo * lo).powf(e) * (e * x.ln_1p()).exp_m1() / (2.0 - alpha)
                }
            }
            KernelKind::Tabulated { .. } => self.moment(hi) - self.moment(lo),
        }
    }

    /// `W(t) = ∫₀^t τ ω(τ) dτ` for a table.
    fn moment(&self, t: f64) -> f64 {
        let KernelKind::Tabulated { radii, values } = &self.kind else {
            unreachable!("moment is only used for tables")
        };
        let last = radii.len() - 1;
        if t >= radii[last] {
            return self.cumulative[last];
        }
        let i = radii.partition_point(|&x| x <= t) - 1;
        self.cumulative[i] + cell_moment(radii[i], radii[i + 1], values[i], values[i + 1], t)
    }
}

/// `∫_a^x τ ω(τ) dτ` with `ω` linear from `(a, wa)` to `(b, wb)`.
fn cell_moment(a: f64, b: f64, wa: f64, wb: f64, x: f64) -> f64 {
    let slope = (wb - wa) / (b - a);
    // ω(τ) = wa + slope (τ − a) = (wa − slope a) + slope τ
    let c0 = wa - slope * a;
    c0 * (x * x - a * a) / 2.0 + slope * (x * x * x - a * a * a) / 3.0
}

/// Weights (unit step) of the Gregory rule applied separately on the nodes
/// `0..=split` and `split..n`, so an integrand with a kink at `split` keeps
/// full order.
fn split_weights(n: usize, split: usize) -> Vec<f64> {
    let mut w = vec![0.0; n];
    for (j, c) in gregory_weights(split + 1).into_iter().enumerate() {
        w[j] += c;
    }
    for (j, c) in gregory_weights(n - split).into_iter().enumerate() {
        w[split + j] += c;
    }
    if split == 0 || split + 1 == n {
        // A one-node piece carries no weight.
        let solo = if split == 0 { 0 } else { n - 1 };
        w[solo] -= 1.0;
    }
    w
}

/// `(ω ∗ h)(r)` on `ℝ³` for a radial `h`:
/// `(2π/r) ∫₀^∞ s h(s) [W(r+s) − W(|r−s|)] ds`, with the `s` integral split at
/// `s = r`. The grid must be log-uniform.
pub fn radial_convolution(omega: &ConvolutionKernel, grid: &RadialGrid, h: &[f64]) -> Result<Vec<f64>> {
    let step = grid.require_log_step()?;
    if h.len() != grid.len() {
        return Err(Error::Grid("density length differs from the grid".into()));
    }
    let nodes = grid.nodes();
    let n = nodes.len();
    // Integrand weight in u = ln s: s · s h(s).
    let g: Vec<f64> = nodes.iter().zip(h).map(|(s, h)| s * s * h).collect();
    let active: Vec<usize> = (0..n).filter(|&j| g[j] != 0.0).collect();
    if active.is_empty() {
        return Ok(vec![0.0; n]);
    }
    let support = omega.support();
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let r = nodes[i];
            let w = split_weights(n, i);
            let (lo, hi) = match support {
                Some(a) => (nodes.partition_point(|&s| s <= r - a), nodes.partition_point(|&s| s < r + a)),
                None => (0, n),
            };
            let acc: f64 = active
                .iter()
                .filter(|&&j| j >= lo && j < hi)
                .map(|&j| w[j] * g[j] * omega.shell(r, nodes[j]))
                .sum();
            2.0 * PI * step * acc / r
        })
        .collect())
}

/// `⟨βu, u⟩` averaged over the sphere: `Σ_k (|φ^+_k|² − |φ^-_k|²) / (4π)`.
/// It is exactly `⟨βu, u⟩` when `u` carries a single sign of `k`.
pub fn hartree_density(u: &PartialWaveField) -> Vec<f64> {
    let mut h = vec![0.0; u.grid().len()];
    for p in u.channels().values() {
        for (j, (a, b)) in p.plus.iter().zip(&p.minus).enumerate() {
            h[j] += (a.norm_sqr() - b.norm_sqr()) / (4.0 * PI);
        }
    }
    h
}

fn check_radial_3d(u: &PartialWaveField) -> Result<()> {
    if u.n() != 3 {
        return Err(Error::DimensionMismatch("the Hartree nonlinearity is three-dimensional".into()));
    }
    if !u.is_dirac_radial() {
        return Err(Error::NonRadial("channels with |k| > 1 carry mass".into()));
    }
    Ok(())
}

/// `V = ω ∗ ⟨βu, u⟩` for a Dirac-radial 3D field.
pub fn hartree_potential(omega: &ConvolutionKernel, u: &PartialWaveField) -> Result<Vec<f64>> {
    check_radial_3d(u)?;
    radial_convolution(omega, u.grid(), &hartree_density(u))
}

/// `N(u) = V u`, channel by channel.
pub fn apply_nonlinearity(omega: &ConvolutionKernel, u: &PartialWaveField) -> Result<PartialWaveField> {
    let v = hartree_potential(omega, u)?;
    u.multiply_radial(&v)
}

/// Largest coupling the solver accepts (exclusive).
pub fn coupling_limit() -> f64 {
    0.75f64.sqrt()
}

/// Nodes of the Duhamel quadrature on each time interval.
pub const DUHAMEL_NODES: usize = 16;

/// Successive factors above 1 that abort the iteration.
const NON_CONTRACTING_RUN: usize = 3;

/// Settings of [`picard_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    /// Final time; `None` applies [`auto_time`].
    pub t_final: Option<f64>,
    /// Number of time intervals (nodes minus one) on `[0, T]`.
    pub intervals: usize,
    /// Stop when `sup_t ‖u^{m+1} − u^m‖_{Ḣ^s_{D_ν}}` falls below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Exponent with `ω ∈ L^p`; fixes `s = 3/(2p)` and the auto time.
    pub p_omega: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { t_final: None, intervals: 16, tol: 1e-10, max_iters: 30, p_omega: 2.0 }
    }
}

impl PicardConfig {
    /// `s = 3/(2p)`.
    pub fn regularity(&self) -> f64 {
        1.5 / self.p_omega
    }
}

/// `min(1, 0.9 / (8 ‖ω‖_p M²))`: the smallness rule `T ‖ω‖ M² ≲ 1` of the
/// contraction argument with a safety margin.
pub fn auto_time(omega_norm: f64, ball_radius: f64) -> f64 {
    let denom = 8.0 * omega_norm * ball_radius * ball_radius;
    if denom > 0.0 {
        (0.9 / denom).min(1.0)
    } else {
        1.0
    }
}

/// The Picard iterates and their convergence record.
#[derive(Debug, Clone)]
pub struct PicardState {
    /// `u⁰` (the linear flow), `u¹ = Φ(u⁰)`, …
    pub iterates: Vec<Trajectory>,
    pub t_final: f64,
    /// Radius `M = 2 ‖u₀‖_{Ḣ^s_{D_ν}}` of the contraction ball.
    pub ball_radius: f64,
    /// `d(u^{m+1}, u^m) / d(u^m, u^{m−1})` with `u^{−1} = 0`; one per step.
    pub contraction_factors: Vec<f64>,
    /// `d(u^{m+1}, u^m)`, the sup over time nodes of the `Ḣ^s_{D_ν}` distance.
    pub distances: Vec<f64>,
    /// `sup_t ‖u^m(t)‖_{Ḣ^s_{D_ν}}` per iterate.
    pub iterate_norms: Vec<f64>,
    pub converged: bool,
    pub nu: f64,
    /// Regularity index of the distance.
    pub s: f64,
}

impl PicardState {
    /// The last iterate.
    pub fn solution(&self) -> &Trajectory {
        &self.iterates[self.iterates.len() - 1]
    }

    /// `max_t |‖u(t)‖ / ‖u₀‖ − 1|` over the last iterate (0 for zero data).
    pub fn mass_drift(&self) -> f64 {
        let states = self.solution().states();
        let m0 = states[0].norm();
        if m0 == 0.0 {
            return 0.0;
        }
        states.iter().map(|u| (u.norm() / m0 - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Duhamel map in the interaction picture on a fixed time grid.
struct Duhamel<'a> {
    transformer: Transformer,
    omega: &'a ConvolutionKernel,
    g0: SpectralField,
    times: Vec<f64>,
}

impl Duhamel<'_> {
    /// `v(s)` by cubic Lagrange interpolation through the four nearest nodes.
    fn interpolate(&self, v: &[SpectralField], s: f64) -> SpectralField {
        let last = self.times.len() - 1;
        let dt = self.times[1] - self.times[0];
        let cell = ((s - self.times[0]) / dt).floor().clamp(0.0, (last - 1) as f64) as usize;
        let first = cell.saturating_sub(1).min(last.saturating_sub(3));
        let idx: Vec<usize> = (first..(first + 4).min(last + 1)).collect();
        let terms: Vec<(f64, &SpectralField)> = idx
            .iter()
            .map(|&i| {
                let l = idx.iter().filter(|&&j| j != i).map(|&j| (s - self.times[j]) / (self.times[i] - self.times[j])).product();
                (l, &v[i])
            })
            .collect();
        combine(&terms)
    }

    /// `e^{−isD} N(u(s))` as a spectrum, `u(s) = e^{isD} v(s)`.
    fn integrand(&self, v: &SpectralField, s: f64) -> Result<SpectralField> {
        let u = self.transformer.inverse_trusted(&v.evolved(s))?;
        let nu_field = apply_nonlinearity(self.omega, &u)?;
        Ok(self.transformer.forward_trusted(&nu_field)?.evolved(-s))
    }

    /// `Φ` in the interaction picture: `g0 − i ∫₀^{t_i} e^{−isD} N(u(s)) ds`
    /// at every node, by Gauss–Legendre on each interval.
    fn apply(&self, v: &[SpectralField]) -> Result<Vec<SpectralField>> {
        let (x, w) = gauss_legendre(DUHAMEL_NODES);
        let increments: Vec<SpectralField> = self
            .times
            .windows(2)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|t| {
                let half = 0.5 * (t[1] - t[0]);
                let mid = 0.5 * (t[1] + t[0]);
                let parts = x
                    .iter()
                    .map(|xi| {
                        let s = mid + half * xi;
                        self.integrand(&self.interpolate(v, s), s)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let terms: Vec<(f64, &SpectralField)> = w.iter().map(|wi| half * wi).zip(parts.iter()).collect();
                Ok(combine(&terms))
            })
            .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(self.times.len());
        out.push(self.g0.clone());
        let mut integral = scaled(&self.g0, Complex64::new(0.0, 0.0));
        for inc in &increments {
            integral = combine(&[(1.0, &integral), (1.0, inc)]);
            out.push(combine_complex(&[(Complex64::new(1.0, 0.0), &self.g0), (Complex64::new(0.0, -1.0), &integral)]));
        }
        Ok(out)
    }

    fn trajectory(&self, v: &[SpectralField], provenance: Provenance) -> Result<Trajectory> {
        let states = self
            .times
            .par_iter()
            .zip(v)
            .map(|(&t, g)| {
                let u = self.transformer.inverse_trusted(&g.evolved(t))?;
                check_tails_of(&u)?;
                Ok(u)
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.times.clone(), states, provenance)
    }
}

fn combine(terms: &[(f64, &SpectralField)]) -> SpectralField {
    let c: Vec<(Complex64, &SpectralField)> = terms.iter().map(|(a, f)| (Complex64::new(*a, 0.0), *f)).collect();
    combine_complex(&c)
}

/// `Σ a_i g_i` over a common grid and channel set.
fn combine_complex(terms: &[(Complex64, &SpectralField)]) -> SpectralField {
    let first = terms[0].1;
    let len = first.rho_grid().len();
    let mut channels = ChannelMap::new();
    for ix in first.channels().keys() {
        let mut p = ChannelProfile::zeros(len);
        for (a, f) in terms {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let q = f.channel(ix).expect("spectra share a channel set");
            for j in 0..len {
                p.plus[j] += a * q.plus[j];
                p.minus[j] += a * q.minus[j];
            }
        }
        channels.insert(*ix, p);
    }
    let mut out = SpectralField::new(first.n(), first.rho_grid().clone()).expect("valid dimension");
    for (ix, p) in channels {
        out.insert(ix, p).expect("validated channel");
    }
    out
}

fn scaled(g: &SpectralField, a: Complex64) -> SpectralField {
    combine_complex(&[(a, g)])
}

fn sup_distance(a: &[SpectralField], b: &[SpectralField], s: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| combine(&[(1.0, x), (-1.0, y)]).weighted_norm(s))
        .fold(0.0, f64::max)
}

fn check_coupling(nu: f64) -> Result<()> {
    if !(nu.abs() < coupling_limit()) {
        return Err(Error::CouplingOutOfRange { nu, reason: format!("the Hartree solver needs |nu| < {}", coupling_limit()) });
    }
    Ok(())
}

/// Picard iteration `u^{m+1} = Φ(u^m)` from the linear flow, on `intervals + 1`
/// uniform nodes of `[0, T]`.
pub fn picard_solve(u0: &PartialWaveField, nu: f64, omega: &ConvolutionKernel, config: &PicardConfig) -> Result<PicardState> {
    check_radial_3d(u0)?;
    check_coupling(nu)?;
    if config.intervals < 3 || config.max_iters == 0 || !(config.tol > 0.0) {
        return Err(Error::Domain("Picard needs at least 3 intervals, one iteration and tol > 0".into()));
    }
    let s = config.regularity();
    let transformer = Transformer::matched(u0, nu, KernelSource::Kummer)?;
    let g0 = transformer.forward(u0)?;
    let ball_radius = 2.0 * g0.weighted_norm(s);
    let t_final = match config.t_final {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(Error::Domain(format!("final time {t} must be positive"))),
        None => auto_time(omega.lp_norm(config.p_omega)?, ball_radius),
    };
    let duhamel = Duhamel { transformer, omega, g0, times: uniform_times(0.0, t_final, config.intervals + 1) };

    let mut v = vec![duhamel.g0.clone(); duhamel.times.len()];
    let mut iterates = vec![duhamel.trajectory(&v, Provenance::Linear)?];
    let mut iterate_norms = vec![v.iter().map(|g| g.weighted_norm(s)).fold(0.0, f64::max)];
    let mut previous = iterate_norms[0];
    let (mut distances, mut factors) = (Vec::new(), Vec::new());
    let mut converged = false;
    for _ in 0..config.max_iters {
        let next = duhamel.apply(&v)?;
        let d = sup_distance(&next, &v, s);
        factors.push(if d == 0.0 { 0.0 } else { d / previous });
        distances.push(d);
        log::debug!("picard step {}: distance {d:e}, factor {:.4}", distances.len(), factors[factors.len() - 1]);
        let run = factors.iter().skip(1).rev().take_while(|f| **f > 1.0).count();
        if run >= NON_CONTRACTING_RUN {
            return Err(Error::NonContraction { factors });
        }
        iterate_norms.push(next.iter().map(|g| g.weighted_norm(s)).fold(0.0, f64::max));
        iterates.push(duhamel.trajectory(&next, Provenance::Nonlinear)?);
        v = next;
        previous = d;
        if d < config.tol {
            converged = true;
            break;
        }
    }
    Ok(PicardState {
        iterates,
        t_final,
        ball_radius,
        contraction_factors: factors,
        distances,
        iterate_norms,
        converged,
        nu,
        s,
    })
}

/// One application of `Φ` to an arbitrary trajectory on a uniform time grid
/// starting at 0 (whose first state is taken as `u₀`).
pub fn duhamel_map(nu: f64, omega: &ConvolutionKernel, traj: &Trajectory) -> Result<Trajectory> {
    let u0 = &traj.states()[0];
    check_radial_3d(u0)?;
    check_coupling(nu)?;
    let times = traj.times().to_vec();
    if times[0] != 0.0 || times.len() < 4 {
        return Err(Error::Domain("the Duhamel map needs at least 4 nodes starting at t = 0".into()));
    }
    let transformer = Transformer::matched(u0, nu, KernelSource::Kummer)?;
    let g0 = transformer.forward(u0)?;
    let v = traj
        .states()
        .iter()
        .zip(&times)
        .map(|(u, &t)| Ok(transformer.forward_trusted(u)?.evolved(-t)))
        .collect::<Result<Vec<_>>>()?;
    let duhamel = Duhamel { transformer, omega, g0, times };
    duhamel.trajectory(&duhamel.apply(&v)?, Provenance::Nonlinear)
}

/// `3 / (1 + 2√(1−ν²))`: lower end of the kernel exponents for which the
/// low-regularity statement (`s = 1/p`, Strichartz space `L^{2p}_T L^{2p'}`)
/// applies.
pub fn low_regularity_threshold(nu: f64) -> f64 {
    3.0 / (1.0 + 2.0 * (1.0 - nu * nu).sqrt())
}

/// Whether a converged solution lies in the spaces the well-posedness
/// statements name, at desk scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellposednessReport {
    pub p_omega: f64,
    pub nu: f64,
    pub converged: bool,
    /// `s = 3/(2p)` when `p ≥ 3/2`.
    pub s_high: Option<f64>,
    /// `sup_t ‖u(t)‖_{Ḣ^{s_high}_{D_ν}}`.
    pub sup_norm_high: Option<f64>,
    /// `s_high ≥ 1`, where `Ḣ^s_{D_ν}` and `Ḣ^s` stop being comparable beyond.
    pub equivalence_boundary: bool,
    /// [`low_regularity_threshold`] at `ν`.
    pub low_threshold: f64,
    /// `s = 1/p` when `p` exceeds the threshold.
    pub s_low: Option<f64>,
    pub sup_norm_low: Option<f64>,
    /// `(2p, 2p')` when the low-regularity statement applies.
    pub mixed_exponents: Option<(f64, f64)>,
    pub mixed_norm: Option<f64>,
    /// `sup_t ‖u(t)‖_{L²}`.
    pub sup_l2: f64,
    /// Every reported norm is finite.
    pub finite: bool,
    pub notes: Vec<String>,
}

fn sup_sobolev(traj: &Trajectory, nu: f64, s: f64) -> Result<f64> {
    let t = Transformer::matched(&traj.states()[0], nu, KernelSource::Kummer)?;
    let norms = traj.states().par_iter().map(|u| Ok(t.forward_trusted(u)?.weighted_norm(s))).collect::<Result<Vec<f64>>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// Evaluates the norms of the converged solution named by the well-posedness
/// statements for a kernel in `L^{p_omega}`; report only.
pub fn wellposedness_certificate(state: &PicardState, p_omega: f64) -> Result<WellposednessReport> {
    if !(p_omega >= 1.0) {
        return Err(Error::Domain(format!("p = {p_omega} must be at least 1")));
    }
    let traj = state.solution();
    let nu = state.nu;
    let mut notes = Vec::new();
    if !state.converged {
        notes.push("iteration did not converge; norms describe the last iterate".into());
    }
    let sup_l2 = traj.states().iter().map(|u| u.norm()).fold(0.0, f64::max);

    let s_high = (p_omega >= 1.5).then(|| 1.5 / p_omega);
    let sup_norm_high = s_high.map(|s| sup_sobolev(traj, nu, s)).transpose()?;
    let equivalence_boundary = s_high.is_some_and(|s| s >= 1.0 - 1e-12);
    if equivalence_boundary {
        notes.push("s = 1: boundary of the equivalence between the Coulomb and free Sobolev norms".into());
    }
    if s_high == Some(0.0) {
        notes.push("bounded kernel: s = 0 and the certificate reduces to L2 bounds".into());
    }

    let low_threshold = low_regularity_threshold(nu);
    let (mut s_low, mut sup_norm_low, mut mixed_exponents, mut mixed) = (None, None, None, None);
    if p_omega > low_threshold {
        let s = if p_omega.is_infinite() { 0.0 } else { 1.0 / p_omega };
        let (p_t, q_x) = if p_omega.is_infinite() { (f64::INFINITY, 2.0) } else { (2.0 * p_omega, 2.0 * p_omega / (p_omega - 1.0)) };
        s_low = Some(s);
        sup_norm_low = Some(sup_sobolev(traj, nu, s)?);
        mixed_exponents = Some((p_t, q_x));
        if p_t >= 2.0 && q_x >= 2.0 {
            let case = admissibility(3, nu, p_t, q_x, RadialClass::DiracRadial)?;
            if !case.admissible {
                notes.push(format!("({p_t}, {q_x}) lies outside the general admissible region; reported for the radial class"));
            }
            mixed = Some(mixed_norm(traj, p_t, q_x)?);
        }
    } else {
        notes.push(format!("p = {p_omega} is at or below the low-regularity threshold {low_threshold:.6}"));
    }
    let finite = [Some(sup_l2), sup_norm_high, sup_norm_low, mixed].iter().flatten().all(|x| x.is_finite());
    Ok(WellposednessReport {
        p_omega,
        nu,
        converged: state.converged,
        s_high,
        sup_norm_high,
        equivalence_boundary,
        low_threshold,
        s_low,
        sup_norm_low,
        mixed_exponents,
        mixed_norm: mixed,
        sup_l2,
        finite,
        notes,
    })
}
