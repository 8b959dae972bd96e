//! Functionals bounded by the dispersive estimates: mixed space-time norms,
//! homogeneous Sobolev norms, the Morrey local-smoothing functional,
//! Strichartz admissibility, annulus exponents and the 2D Hardy ratio.
//!
//! Angular `L²` is exact by orthonormality of the partial waves: at each `r`
//! it is the `ℓ²` norm over `(channel, ±)` of the radial profiles.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{least_squares_slope, make_channel, EnergySign, WaveIndex};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::hankel::{KernelSource, Transformer};
use crate::partialwave::{channel_density, d_du, PartialWaveField};
use crate::propagator::{Propagator, Trajectory};
use crate::quadrature::gauss_legendre;

fn check_exponent(name: &str, x: f64) -> Result<()> {
    if x >= 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} must lie in [2, inf]")))
    }
}

/// `(∫ d^{q/2} r^{n-1} dr)^{1/q}` for a sampled squared modulus `d`;
/// the grid maximum of `√d` for `q = ∞`.
pub fn radial_lq(grid: &RadialGrid, n: u8, density: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return density.iter().fold(0.0, |m: f64, d| m.max(d.sqrt()));
    }
    let f: Vec<f64> = density.iter().map(|d| d.powf(q / 2.0)).collect();
    grid.integrate(n, &f).powf(1.0 / q)
}

/// `L^p` norm over `times` by the trapezoid rule (maximum for `p = ∞`).
pub fn time_lp(times: &[f64], values: &[f64], p: f64) -> Result<f64> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::Domain("time samples and values differ in length".into()));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
    }
    if times.len() < 2 {
        return Err(Error::Domain("a finite time exponent needs at least two nodes".into()));
    }
    let acc: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].abs().powf(p) + v[1].abs().powf(p)))
        .sum();
    Ok(acc.powf(1.0 / p))
}

/// `‖u‖_{L^p_t L^q_{r^{n-1}dr} L²_θ}` over the trajectory's time nodes.
pub fn mixed_norm(traj: &Trajectory, p: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let per_time: Vec<f64> = traj
        .states()
        .par_iter()
        .map(|u| radial_lq(u.grid(), u.n(), &u.angular_density(), q))
        .collect();
    time_lp(traj.times(), &per_time, p)
}

/// The same space-time norm with the `ℓ²` over `(channel, ±)` taken outside
/// the radial `L^q`. For `q ≥ 2` it dominates [`mixed_norm`] (Minkowski).
pub fn mixed_norm_l2_outside(traj: &Trajectory, p: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let per_time: Vec<f64> = traj
        .states()
        .par_iter()
        .map(|u| {
            let mut acc = 0.0;
            for prof in u.channels().values() {
                for comp in [&prof.plus, &prof.minus] {
                    let d: Vec<f64> = comp.iter().map(|z| z.norm_sqr()).collect();
                    acc += radial_lq(u.grid(), u.n(), &d, q).powi(2);
                }
            }
            acc.sqrt()
        })
        .collect();
    time_lp(traj.times(), &per_time, p)
}

/// Which operator defines the homogeneous Sobolev norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SobolevFlavor {
    /// `‖|D|^s u‖ = ‖(−Δ)^{s/2} u‖`, through the `ν = 0` transform.
    Free,
    /// `‖|D_ν|^s u‖`, through the transform at coupling `ν`.
    Coulomb(f64),
}

/// `‖u‖_{Ḣ^s}` or `‖u‖_{Ḣ^s_{D_ν}}`, as `‖ρ^s P u‖_{L²(ρ^{n-1}dρ)}` on the
/// `ρ` grid matched to `u`'s grid. Requires `s ∈ [−1, 2]`.
pub fn sobolev_norm(u: &PartialWaveField, s: f64, flavor: SobolevFlavor) -> Result<f64> {
    if !(-1.0..=2.0).contains(&s) {
        return Err(Error::Domain(format!("Sobolev index s = {s} outside [-1, 2]")));
    }
    let nu = match flavor {
        SobolevFlavor::Free => 0.0,
        SobolevFlavor::Coulomb(nu) => nu,
    };
    let t = Transformer::matched(u, nu, KernelSource::Kummer)?;
    Ok(t.forward(u)?.weighted_norm(s))
}

/// Per-radius values `R^{-1/2} ‖u‖_{L²_t L²(|x| ≤ R)}` and their supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorreyProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub supremum: f64,
    /// Index of the radius attaining the supremum.
    pub argmax: usize,
}

impl MorreyProfile {
    fn from_values(radii: Vec<f64>, values: Vec<f64>) -> Self {
        let (argmax, supremum) =
            values.iter().copied().enumerate().fold((0, 0.0), |(i, m), (j, v)| if v > m { (j, v) } else { (i, m) });
        MorreyProfile { radii, values, supremum, argmax }
    }

    /// `max / median` of the per-radius values.
    pub fn max_over_median(&self) -> f64 {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        let mid = v.len() / 2;
        let median = if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) };
        if median > 0.0 {
            self.supremum / median
        } else {
            f64::INFINITY
        }
    }

    /// Whether the supremum is attained strictly inside the radius set.
    pub fn interior_supremum(&self) -> bool {
        self.argmax > 0 && self.argmax + 1 < self.values.len()
    }
}

/// `2^{lo..=hi}`.
pub fn dyadic_radii(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|j| 2f64.powi(j)).collect()
}

/// The Morrey functional over the trajectory's time window. Radii must lie
/// inside the grid.
pub fn morrey_functional(traj: &Trajectory, radii: &[f64]) -> Result<MorreyProfile> {
    let first = &traj.states()[0];
    let (lo, hi) = (first.grid().r_min(), first.grid().r_max());
    if let Some(r) = radii.iter().find(|r| !(**r >= lo && **r <= hi)) {
        return Err(Error::Domain(format!("radius {r} outside the grid range [{lo}, {hi}]")));
    }
    let densities: Vec<Vec<f64>> = traj.states().par_iter().map(|u| u.angular_density()).collect();
    let values = radii
        .iter()
        .map(|&r| {
            let masses: Vec<f64> = traj
                .states()
                .iter()
                .zip(&densities)
                .map(|(u, d)| u.grid().integrate_to(u.n(), d, r).max(0.0).sqrt())
                .collect();
            Ok(time_lp(traj.times(), &masses, 2.0)? / r.sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MorreyProfile::from_values(radii.to_vec(), values))
}

/// Spectral weights below this fraction of the peak are dropped from
/// [`morrey_exact`].
const MORREY_SPECTRAL_CUTOFF: f64 = 1e-16;

/// The Morrey functional over all times `t ∈ ℝ`, evaluated without time
/// sampling: by Plancherel in `t`,
///
/// ```text
/// ∫_ℝ ‖u(t)‖²_{L²(|x|≤R)} dt = ∫_0^R D(r) r^{n-1} dr,
/// D(r) = 2π Σ_k ∫ ρ^{2(n-1)} (|ψ_{k,+}(ρr)|² |g_k^+(ρ)|² + |ψ_{k,-}(ρr)|² |g_k^-(ρ)|²) dρ,
/// ```
///
/// with `g = P u0` on the `ρ` grid matched to `u0`. Radii are free of the
/// grid range.
pub fn morrey_exact(u0: &PartialWaveField, nu: f64, radii: &[f64]) -> Result<MorreyProfile> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::Domain("radii must be positive".into()));
    }
    let n = u0.n();
    let transformer = Transformer::matched(u0, nu, KernelSource::Kummer)?;
    let g = transformer.forward(u0)?;
    let rho = g.rho_grid();
    let h = rho.require_log_step()?;
    let r_hi = radii.iter().copied().fold(0.0, f64::max);
    let r_lo = radii.iter().copied().fold(f64::INFINITY, f64::min) * 1e-6;
    let count = ((r_hi / r_lo).ln() / h).ceil() as usize + 2;
    let line = RadialGrid::log_uniform_count(r_lo, h, count);

    // Spectral weights ρ^{2(n-1)} dρ |g^±|², summed over channels sharing k.
    let w: Vec<f64> =
        rho.measure(n).iter().zip(rho.nodes()).map(|(m, x)| m * x.powi(n as i32 - 1)).collect();
    let mut groups: std::collections::BTreeMap<i32, (WaveIndex, Vec<f64>, Vec<f64>)> = Default::default();
    for (ix, p) in g.channels() {
        let e = groups.entry(ix.two_k()).or_insert_with(|| (*ix, vec![0.0; rho.len()], vec![0.0; rho.len()]));
        for j in 0..rho.len() {
            e.1[j] += p.plus[j].norm_sqr() * w[j];
            e.2[j] += p.minus[j].norm_sqr() * w[j];
        }
    }
    let mut density = vec![0.0; count];
    for (ix, a_plus, a_minus) in groups.into_values() {
        let peak = a_plus.iter().chain(&a_minus).fold(0.0, |m: f64, v| m.max(*v));
        if peak == 0.0 {
            continue;
        }
        let active: Vec<usize> =
            (0..rho.len()).filter(|&j| a_plus[j].max(a_minus[j]) > MORREY_SPECTRAL_CUTOFF * peak).collect();
        let (j0, j1) = (active[0], active[active.len() - 1]);
        let channel = make_channel(ix, nu)?;
        // |ψ_±|² on the line x_m = r_lo ρ_{j0} e^{mh}, m < count + j1 − j0.
        let x0 = r_lo * rho.nodes()[j0];
        let sq: Vec<(f64, f64)> = (0..count + j1 - j0)
            .into_par_iter()
            .map(|m| {
                let x = x0 * (m as f64 * h).exp();
                let (fp, gp) = channel.value(EnergySign::Plus, x)?;
                let (fm, gm) = channel.value(EnergySign::Minus, x)?;
                Ok((fp * fp + gp * gp, fm * fm + gm * gm))
            })
            .collect::<Result<_>>()?;
        let part: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|i| {
                active
                    .iter()
                    .map(|&j| {
                        let (sp, sm) = sq[i + j - j0];
                        sp * a_plus[j] + sm * a_minus[j]
                    })
                    .sum::<f64>()
            })
            .collect();
        for (d, p) in density.iter_mut().zip(part) {
            *d += 2.0 * PI * p;
        }
    }
    let values = radii.iter().map(|&r| (line.integrate_to(n, &density, r).max(0.0) / r).sqrt()).collect();
    Ok(MorreyProfile::from_values(radii.to_vec(), values))
}

/// Which data a Strichartz statement covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialClass {
    All,
    DiracRadial,
    DiracNonradial,
}

/// An exponent pair with its scaling-determined regularity and admissibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzCase {
    pub n: u8,
    pub p: f64,
    pub q: f64,
    /// `s = n/2 − n/q − 1/p`.
    pub s: f64,
    pub nu: f64,
    pub admissible: bool,
    pub radial_class: RadialClass,
    /// Upper end of the `q` range (`∞` when unrestricted).
    pub q_c: f64,
    /// Lower end of the `p` range in 2D (`p > p_c`); `None` in 3D (`p ≥ 2`).
    pub p_c: Option<f64>,
}

/// Coupling bound of a Strichartz statement and whether it is attained.
pub fn coupling_limit(n: u8, class: RadialClass) -> Result<(f64, bool)> {
    match (n, class) {
        (2, RadialClass::DiracNonradial) => Ok((0.5, true)),
        (2, _) => Ok((2f64.sqrt() / 3.0, false)),
        (3, RadialClass::DiracNonradial) => Ok((1.0, true)),
        (3, _) => Ok((15f64.sqrt() / 4.0, false)),
        _ => Err(Error::DimensionMismatch(format!("n = {n}; expected 2 or 3"))),
    }
}

/// `(q_c, p_c)` for the class; `p_c` is `None` in 3D.
pub fn critical_exponents(n: u8, nu: f64, class: RadialClass) -> Result<(f64, Option<f64>)> {
    let (limit, inclusive) = coupling_limit(n, class)?;
    let inside = if inclusive { nu.abs() <= limit } else { nu.abs() < limit };
    if !inside || !nu.is_finite() {
        let rel = if inclusive { "<=" } else { "<" };
        return Err(Error::CouplingOutOfRange { nu, reason: format!("this statement needs |nu| {rel} {limit}") });
    }
    Ok(match (n, class) {
        (2, RadialClass::DiracNonradial) => (f64::INFINITY, Some(2.0)),
        (2, _) => {
            let g = (0.25 - nu * nu).sqrt();
            (2.0 / (0.5 - g), Some((g + 0.5) / g))
        }
        (_, RadialClass::DiracNonradial) => (f64::INFINITY, None),
        _ => (3.0 / (1.0 - (1.0 - nu * nu).sqrt()), None),
    })
}

/// Evaluates the admissibility condition for `(p, q)` (each in `[2, ∞]`).
pub fn admissibility(n: u8, nu: f64, p: f64, q: f64, class: RadialClass) -> Result<StrichartzCase> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let (q_c, p_c) = critical_exponents(n, nu, class)?;
    let endpoint = p.is_infinite() && q == 2.0;
    let q_ok = if class == RadialClass::DiracNonradial { q <= q_c } else { q < q_c };
    let interior = match p_c {
        Some(pc) => p > pc && q_ok && 2.0 / q + (pc / p) * (1.0 - 2.0 / q_c) < 1.0,
        None => q_ok && 2.0 / q + 1.0 / p < 1.0,
    };
    let nf = n as f64;
    Ok(StrichartzCase {
        n,
        p,
        q,
        s: nf / 2.0 - nf / q - 1.0 / p,
        nu,
        admissible: endpoint || interior,
        radial_class: class,
        q_c,
        p_c,
    })
}

/// A sampled time window `[t0, t1]` with `count` uniform nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t0: f64,
    pub t1: f64,
    pub count: usize,
}

impl TimeWindow {
    pub fn nodes(&self) -> Vec<f64> {
        crate::propagator::uniform_times(self.t0, self.t1, self.count)
    }

    /// The window stretched by `λ` (matching a datum dilated by `λ`).
    pub fn dilated(&self, lambda: f64) -> Self {
        TimeWindow { t0: self.t0 * lambda, t1: self.t1 * lambda, count: self.count }
    }
}

/// Left and right sides of a Strichartz estimate and their ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzRatio {
    pub case: StrichartzCase,
    pub mixed_norm: f64,
    pub sobolev_coulomb: f64,
    pub sobolev_free: f64,
    /// `mixed_norm / sobolev_coulomb`.
    pub ratio: f64,
    /// `mixed_norm / sobolev_free`.
    pub ratio_free: f64,
}

/// `‖e^{itD_ν} u0‖_{L^p_t L^q L²_θ}` over the window divided by the
/// `Ḣ^s_{D_ν}` (and, separately, `Ḣ^s`) norm of `u0`.
pub fn strichartz_ratio(u0: &PartialWaveField, nu: f64, case: &StrichartzCase, window: &TimeWindow) -> Result<StrichartzRatio> {
    if !case.admissible {
        return Err(Error::Domain(format!("(p, q) = ({}, {}) is not admissible", case.p, case.q)));
    }
    if case.n != u0.n() || case.nu != nu {
        return Err(Error::Domain("case and datum disagree on n or nu".into()));
    }
    if u0.norm() == 0.0 {
        return Err(Error::Domain("the zero datum has no Strichartz ratio".into()));
    }
    let prop = Propagator::new(u0, nu)?;
    let traj = prop.trajectory(&window.nodes())?;
    let mixed = mixed_norm(&traj, case.p, case.q)?;
    let sobolev_coulomb = prop.spectrum().weighted_norm(case.s);
    let sobolev_free = sobolev_norm(u0, case.s, SobolevFlavor::Free)?;
    Ok(StrichartzRatio {
        case: *case,
        mixed_norm: mixed,
        sobolev_coulomb,
        sobolev_free,
        ratio: mixed / sobolev_coulomb,
        ratio_free: mixed / sobolev_free,
    })
}

/// The dyadic exponent rules of the annulus and localized estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    pub n: u8,
    /// Embedding parameter of the `p ≥ 4` branch of `δ`, in `(1/2, 1)`.
    pub eps: f64,
}

impl ExponentTable {
    pub fn new(n: u8, eps: f64) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::DimensionMismatch(format!("n = {n}; expected 2 or 3")));
        }
        if !(eps > 0.5 && eps < 1.0) {
            return Err(Error::Domain(format!("eps = {eps} must lie in (1/2, 1)")));
        }
        Ok(ExponentTable { n, eps })
    }

    /// Large-`R` exponent of `‖ψ_k‖_{L^q([R,2R])}`.
    pub fn beta(&self, q: f64) -> f64 {
        let shift = if self.n == 2 { 0.0 } else { 0.5 };
        if q < 4.0 {
            1.0 / q - 0.5 - shift
        } else {
            1.0 / q - 1.0 / 3.0 - shift
        }
    }

    /// Small-`R` exponent of `‖ψ_k‖_{L^q([R,2R])}`: `γ + 1/q − (n−1)/2`.
    pub fn small_r(&self, gamma: f64, q: f64) -> f64 {
        gamma + 1.0 / q - (self.n as f64 - 1.0) / 2.0
    }

    /// Time-integrability exponent of the localized estimate.
    pub fn delta(&self, p: f64) -> f64 {
        let base = if p < 4.0 { 1.0 / p } else { 1.0 / (4.0 * self.eps) };
        base - (self.n as f64 - 1.0) / 2.0
    }

    /// Weight `Q(NR)` of the dyadic summation: `(NR)^{a}` for `NR ≤ 1`,
    /// `(NR)^{b}` for `NR ≥ 2`, and the larger of the two on `(1, 2)`.
    pub fn q_weight(&self, gamma: f64, p: f64, q: f64, nr: f64) -> f64 {
        let (a, b) = self.q_exponents(gamma, p, q);
        if nr <= 1.0 {
            nr.powf(a)
        } else if nr >= 2.0 {
            nr.powf(b)
        } else {
            nr.powf(a).max(nr.powf(b))
        }
    }

    /// `(a, b)` with `a = γ − (n−1)/2 + n/q` and `b = 1/q + δ(p)(1 − 2/q)`.
    pub fn q_exponents(&self, gamma: f64, p: f64, q: f64) -> (f64, f64) {
        let nf = self.n as f64;
        (gamma - (nf - 1.0) / 2.0 + nf / q, 1.0 / q + self.delta(p) * (1.0 - 2.0 / q))
    }

    /// Whether the dyadic sums of `Q` converge (`a > 0` and `b < 0`).
    pub fn summable(&self, gamma: f64, p: f64, q: f64) -> bool {
        let (a, b) = self.q_exponents(gamma, p, q);
        a > 0.0 && b < 0.0
    }
}

/// Which end of the radius range an annulus fit probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnulusRange {
    /// `R ∈ 2^{-14..-7}`.
    Small,
    /// `R ∈ 2^{5..12}`.
    Large,
}

impl AnnulusRange {
    pub fn radii(self) -> Vec<f64> {
        match self {
            AnnulusRange::Small => dyadic_radii(-14, -7),
            AnnulusRange::Large => dyadic_radii(5, 12),
        }
    }
}

/// Least-squares log-log slope of `‖ψ_k‖_{L^q([R,2R], dr)}` against `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusFit {
    pub radii: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

/// Nodes per panel and the largest panel length of the annulus quadrature.
const ANNULUS_NODES: usize = 8;
const ANNULUS_PANEL: f64 = 0.5;

/// `‖ψ_{k,+}‖_{L^q([R,2R], dr)}` at unit energy, `|ψ| = (F² + G²)^{1/2}`.
pub fn annulus_norm(index: WaveIndex, nu: f64, q: f64, radius: f64) -> Result<f64> {
    check_exponent("q", q)?;
    let channel = make_channel(index, nu)?;
    let panels = (radius / ANNULUS_PANEL).ceil().max(4.0) as usize;
    let (x, w) = gauss_legendre(ANNULUS_NODES);
    let width = radius / panels as f64;
    let samples: Vec<(f64, f64)> = (0..panels)
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = radius + i as f64 * width;
            x.iter().zip(&w).map(move |(x, w)| (a + 0.5 * width * (x + 1.0), 0.5 * width * w)).collect::<Vec<_>>()
        })
        .map(|(r, w)| {
            let (f, g) = channel.value(EnergySign::Plus, r)?;
            Ok(((f * f + g * g).sqrt(), w))
        })
        .collect::<Result<_>>()?;
    Ok(if q.is_infinite() {
        samples.iter().fold(0.0, |m: f64, (v, _)| m.max(*v))
    } else {
        samples.iter().map(|(v, w)| w * v.powf(q)).sum::<f64>().powf(1.0 / q)
    })
}

/// Fits the dyadic decay or growth of the annulus norms over `range`.
pub fn annulus_exponent_fit(index: WaveIndex, nu: f64, q: f64, range: AnnulusRange) -> Result<AnnulusFit> {
    let radii = range.radii();
    let norms = radii.iter().map(|&r| annulus_norm(index, nu, q, r)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    let (mx, my) = (xs.iter().sum::<f64>() / xs.len() as f64, ys.iter().sum::<f64>() / ys.len() as f64);
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    Ok(AnnulusFit { radii, norms, slope, residual })
}

/// `‖|x|^{-1} u‖_{L²} / ‖∇u‖_{L²}` for a 2D field with no `|k| = 1/2`
/// content, channelwise: each component `f^± Ξ^±_k` is a scalar of angular
/// frequency `k ∓ 1/2`, so `|∇|² = |∂_r f|² + (k ∓ 1/2)² |f|²/r²`.
pub fn hardy_check_2d(u: &PartialWaveField) -> Result<f64> {
    if u.n() != 2 {
        return Err(Error::DimensionMismatch("the Hardy check is two-dimensional".into()));
    }
    let h = u.grid().require_log_step()?;
    let nodes = u.grid().nodes();
    let mut lhs = vec![0.0; nodes.len()];
    let mut rhs = vec![0.0; nodes.len()];
    for (ix, p) in u.channels() {
        if ix.is_dirac_radial() {
            if !p.is_zero() {
                return Err(Error::NonzeroRadialChannel(format!("{ix} carries mass")));
            }
            continue;
        }
        for (comp, freq) in [(&p.plus, ix.k() - 0.5), (&p.minus, ix.k() + 0.5)] {
            let du = d_du(comp, h);
            for j in 0..nodes.len() {
                let r2 = nodes[j] * nodes[j];
                let f2 = comp[j].norm_sqr();
                lhs[j] += f2 / r2;
                rhs[j] += (du[j].norm_sqr() + freq * freq * f2) / r2;
            }
        }
    }
    let num = u.grid().integrate(2, &lhs);
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok((num / u.grid().integrate(2, &rhs)).sqrt())
}

/// Squared modulus at each node, summed over channels.
pub fn field_density(u: &PartialWaveField) -> Vec<f64> {
    channel_density(u.channels(), u.grid().len())
}
