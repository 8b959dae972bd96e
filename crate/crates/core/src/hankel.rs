//! The distorted (relativistic) Hankel transform `P_k` and its inverse.
//!
//! ```text
//! (P_k φ)^±(ρ) = ∫ ψ_{k,±}(ρ r) · φ(r) r^{n-1} dr,
//! φ(r)         = ∫ [ψ_{k,+}(ρ r) g^+(ρ) + ψ_{k,-}(ρ r) g^-(ρ)] ρ^{n-1} dρ.
//! ```
//!
//! Both integrals use the endpoint-corrected trapezoid rule in `ln r` and
//! `ln ρ` on grids sharing one step `h`. The kernel then depends on `i + j`
//! only, so each channel caches `ψ_±` on a single log-uniform line of
//! `N_r + N_ρ − 1` products `ρ_i r_j`, and each transform is a discrete
//! correlation evaluated by FFT. The step is tied to the bandwidth by
//! `h = π / (s · ρ_max · r_max)` with oversampling `s` (default 2), which keeps
//! the oscillatory integrands well above their Nyquist rate.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{make_channel, EigenChannel, EnergySign, WaveIndex};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::partialwave::{
    apply_radial_dirac, channel_density, check_channel, entries, from_entries, ChannelEntry, ChannelMap,
    ChannelProfile, PartialWaveField,
};
use crate::specfun::bessel_j;

/// Default bound on the fraction of `L²` mass allowed in the outer (or inner)
/// band of a grid before a transform reports truncation.
pub const TAIL_LIMIT: f64 = 1e-10;

/// Width of the boundary bands used by the tail check: a factor 1.25 in radius.
pub const TAIL_BAND: f64 = 1.25;

/// Oversampling of `ρ` grids matched to a given `r` grid.
pub const DEFAULT_OVERSAMPLING: f64 = 2.0;

/// Default ratio `r_min / r_max` (and `ρ_min / ρ_max`).
pub const DEFAULT_DEPTH: f64 = 1e-9;

/// Truncated domains and resolution of a transform pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Sampling factor `s` in `h = π / (s ρ_max r_max)`.
    pub oversampling: f64,
}

impl GridSpec {
    /// Data supported in `r <= r_max` with energies `ρ <= rho_max`; inner
    /// cut-offs at [`DEFAULT_DEPTH`] times the outer ones, oversampling 2.
    pub fn new(r_max: f64, rho_max: f64) -> Self {
        GridSpec { r_min: DEFAULT_DEPTH * r_max, r_max, rho_min: DEFAULT_DEPTH * rho_max, rho_max, oversampling: 2.0 }
    }

    /// Same domains with the step divided by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        GridSpec { oversampling: self.oversampling * factor, ..*self }
    }

    /// Domains scaled for the dilated datum `u(x/λ)`: `r` by `λ`, `ρ` by `1/λ`.
    pub fn dilated(&self, lambda: f64) -> Self {
        GridSpec {
            r_min: self.r_min * lambda,
            r_max: self.r_max * lambda,
            rho_min: self.rho_min / lambda,
            rho_max: self.rho_max / lambda,
            ..*self
        }
    }

    pub fn step(&self) -> f64 {
        PI / (self.oversampling * self.rho_max * self.r_max)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.r_min > 0.0
            && self.r_max > self.r_min
            && self.rho_min > 0.0
            && self.rho_max > self.rho_min
            && self.oversampling > 0.0
            && [self.r_min, self.r_max, self.rho_min, self.rho_max, self.oversampling].iter().all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Grid(format!("invalid grid spec {self:?}")))
        }
    }

    /// The `r` and `ρ` grids (first node at the inner cut-off, last node at or
    /// beyond the outer one).
    pub fn grids(&self) -> Result<(RadialGrid, RadialGrid)> {
        self.validate()?;
        let h = self.step();
        let count = |lo: f64, hi: f64| ((hi / lo).ln() / h).ceil() as usize + 1;
        Ok((
            RadialGrid::log_uniform_count(self.r_min, h, count(self.r_min, self.r_max)),
            RadialGrid::log_uniform_count(self.rho_min, h, count(self.rho_min, self.rho_max)),
        ))
    }
}

/// The `ρ` grid paired with an existing log-uniform `r` grid: same step,
/// `ρ_max = π / (s h r_max)` and `ρ_min = ρ_max ·` [`DEFAULT_DEPTH`].
pub fn matched_rho_grid(r_grid: &RadialGrid, oversampling: f64) -> Result<RadialGrid> {
    let h = r_grid.require_log_step()?;
    if !(oversampling > 0.0) {
        return Err(Error::Grid(format!("oversampling must be positive, got {oversampling}")));
    }
    let rho_max = PI / (oversampling * h * r_grid.r_max());
    let rho_min = DEFAULT_DEPTH * rho_max;
    let count = ((rho_max / rho_min).ln() / h).ceil() as usize + 1;
    Ok(RadialGrid::log_uniform_count(rho_min, h, count))
}

/// How the kernel is evaluated: the confluent-hypergeometric closed form, or
/// (at `ν = 0` only) Bessel functions. The two routes share no code below the
/// quadrature and serve as mutual oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelSource {
    Kummer,
    Bessel,
}

/// Spectra of the kernel lines `ψ_±` sampled at `x_m = r_min ρ_min e^{mh}`,
/// on a common FFT length, so a transform costs two forward and two inverse
/// FFTs.
#[derive(Clone)]
struct KernelCache {
    f_plus: Vec<Complex64>,
    g_plus: Vec<Complex64>,
    f_minus: Vec<Complex64>,
    g_minus: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for KernelCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelCache").field("fft_len", &self.f_plus.len()).finish()
    }
}

/// Smallest `2^a 3^b 5^c` not below `n`.
fn fast_len(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p5 = 1;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut m = p35;
            while m < n {
                m *= 2;
            }
            best = best.min(m);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

impl KernelCache {
    fn new(lines: [Vec<f64>; 4]) -> Self {
        let len = fast_len(lines[0].len());
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let ifft = planner.plan_fft_inverse(len);
        let [f_plus, g_plus, f_minus, g_minus] = lines.map(|line| {
            let mut buf: Vec<Complex64> = line.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            buf.resize(len, Complex64::new(0.0, 0.0));
            fft.process(&mut buf);
            buf
        });
        KernelCache { f_plus, g_plus, f_minus, g_minus, fft, ifft }
    }

    /// `out_i = Σ_j (ka[i+j] a_j + kb[i+j] b_j)` for `i < out_len`, with
    /// `ka, kb` given by their spectra. The correlation is a linear
    /// convolution with the reversed inputs; no wrap-around reaches the
    /// retained window because the FFT length covers the kernel line.
    fn correlate(&self, ka: &[Complex64], kb: &[Complex64], a: &[Complex64], b: &[Complex64], out_len: usize) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        if a.iter().chain(b).all(|z| *z == zero) {
            return vec![zero; out_len];
        }
        let len = ka.len();
        let spectrum = |x: &[Complex64]| {
            let mut buf = vec![zero; len];
            for (slot, z) in buf.iter_mut().zip(x.iter().rev()) {
                *slot = *z;
            }
            self.fft.process(&mut buf);
            buf
        };
        let (sa, sb) = (spectrum(a), spectrum(b));
        let mut acc: Vec<Complex64> = (0..len).map(|i| ka[i] * sa[i] + kb[i] * sb[i]).collect();
        self.ifft.process(&mut acc);
        let scale = 1.0 / len as f64;
        acc[a.len() - 1..a.len() - 1 + out_len].iter().map(|z| z * scale).collect()
    }
}

fn free_kernel(n: u8, k: f64, x: f64) -> Result<[f64; 4]> {
    let c = x.powf(-(n as f64 - 2.0) / 2.0) / 2f64.sqrt();
    let ak = k.abs();
    let (f, g) = if k > 0.0 {
        (bessel_j(ak + 0.5, x)?, bessel_j(ak - 0.5, x)?)
    } else {
        (bessel_j(ak - 0.5, x)?, -bessel_j(ak + 0.5, x)?)
    };
    let s = k.signum();
    Ok([c * f, c * g, -s * c * f, s * c * g])
}

/// One channel's transform: grids, kernel cache and tail policy.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct TransformPlan {
    pub channel: EigenChannel,
    pub source: KernelSource,
    r_grid: RadialGrid,
    rho_grid: RadialGrid,
    r_measure: Vec<f64>,
    rho_measure: Vec<f64>,
    r_bias: Vec<f64>,
    rho_bias: Vec<f64>,
    kernel: KernelCache,
    pub tail_limit: f64,
}

fn check_pair(r_grid: &RadialGrid, rho_grid: &RadialGrid) -> Result<f64> {
    let h = r_grid.require_log_step()?;
    let h2 = rho_grid.require_log_step()?;
    if (h - h2).abs() > 1e-12 * h {
        return Err(Error::Grid(format!("r and rho grids need a common log step ({h} vs {h2})")));
    }
    Ok(h)
}

impl TransformPlan {
    /// Plan for `channel` between the given grids (log-uniform, common step).
    pub fn new(channel: EigenChannel, r_grid: RadialGrid, rho_grid: RadialGrid, source: KernelSource) -> Result<Self> {
        let h = check_pair(&r_grid, &rho_grid)?;
        if source == KernelSource::Bessel && channel.nu != 0.0 {
            return Err(Error::Domain("the Bessel kernel exists only at nu = 0".into()));
        }
        let n = channel.n();
        let x0 = r_grid.r_min() * rho_grid.r_min();
        let len = r_grid.len() + rho_grid.len() - 1;
        let k = channel.k();
        let values: Vec<[f64; 4]> = (0..len)
            .into_par_iter()
            .map(|m| {
                let x = x0 * (m as f64 * h).exp();
                match source {
                    KernelSource::Kummer => {
                        let (fp, gp) = channel.value(EnergySign::Plus, x)?;
                        let (fm, gm) = channel.value(EnergySign::Minus, x)?;
                        Ok([fp, gp, fm, gm])
                    }
                    KernelSource::Bessel => free_kernel(n, k, x),
                }
            })
            .collect::<Result<_>>()?;
        // `x^{(n-1)/2} ψ` is bounded on the whole line, while `ψ` itself grows
        // like `x^{γ-(n-1)/2}` toward the origin; FFT round-off scales with the
        // largest entry, so the bounded line is correlated and the power is
        // split back as `(ρ_i r_j)^{-(n-1)/2}`.
        let p = (n as f64 - 1.0) / 2.0;
        let bias = |m: usize| ((x0.ln() + m as f64 * h) * p).exp();
        let kernel = KernelCache::new([0, 1, 2, 3].map(|c| values.iter().enumerate().map(|(m, v)| v[c] * bias(m)).collect()));
        let inverse_power = |g: &RadialGrid| g.nodes().iter().map(|x| x.powf(-p)).collect::<Vec<f64>>();
        Ok(TransformPlan {
            r_measure: r_grid.measure(n),
            rho_measure: rho_grid.measure(n),
            r_bias: inverse_power(&r_grid),
            rho_bias: inverse_power(&rho_grid),
            channel,
            source,
            r_grid,
            rho_grid,
            kernel,
            tail_limit: TAIL_LIMIT,
        })
    }

    /// Plan for `(index, ν)` on the grids of `spec`.
    pub fn from_spec(index: WaveIndex, nu: f64, spec: &GridSpec) -> Result<Self> {
        let (r, rho) = spec.grids()?;
        Self::new(make_channel(index, nu)?, r, rho, KernelSource::Kummer)
    }

    pub fn r_grid(&self) -> &RadialGrid {
        &self.r_grid
    }

    pub fn rho_grid(&self) -> &RadialGrid {
        &self.rho_grid
    }

    /// `(g^+, g^-) = P_k (f^+, f^-)`.
    pub fn forward(&self, f: &ChannelProfile) -> Result<ChannelProfile> {
        check_len(f, self.r_grid.len(), "r")?;
        check_tails(&self.r_grid, self.channel.n(), &f.density(), self.tail_limit, "r")?;
        Ok(self.forward_unchecked(f))
    }

    pub(crate) fn forward_unchecked(&self, f: &ChannelProfile) -> ChannelProfile {
        let (a, b) = weighted(f, &self.r_measure, &self.r_bias);
        let m = self.rho_grid.len();
        let k = &self.kernel;
        let out = ChannelProfile { plus: k.correlate(&k.f_plus, &k.g_plus, &a, &b, m), minus: k.correlate(&k.f_minus, &k.g_minus, &a, &b, m) };
        rescaled(out, &self.rho_bias)
    }

    /// `f = P_k^{-1} (g^+, g^-)`.
    pub fn inverse(&self, g: &ChannelProfile) -> Result<ChannelProfile> {
        check_len(g, self.rho_grid.len(), "rho")?;
        check_tails(&self.rho_grid, self.channel.n(), &g.density(), self.tail_limit, "rho")?;
        Ok(self.inverse_unchecked(g))
    }

    fn inverse_unchecked(&self, g: &ChannelProfile) -> ChannelProfile {
        let (a, b) = weighted(g, &self.rho_measure, &self.rho_bias);
        let m = self.r_grid.len();
        let k = &self.kernel;
        let out = ChannelProfile { plus: k.correlate(&k.f_plus, &k.f_minus, &a, &b, m), minus: k.correlate(&k.g_plus, &k.g_minus, &a, &b, m) };
        rescaled(out, &self.r_bias)
    }

    /// `‖P_k d_{ν,k} f − σ₃ ρ P_k f‖ / ‖σ₃ ρ P_k f‖` in `L²(ρ^{n-1} dρ)`
    /// (zero for zero input).
    pub fn diagonalization_residual(&self, f: &ChannelProfile) -> Result<f64> {
        if f.is_zero() {
            return Ok(0.0);
        }
        let (dp, dm) = apply_radial_dirac(self.channel.index, self.channel.nu, &f.plus, &f.minus, &self.r_grid)?;
        let lhs = self.forward(&ChannelProfile { plus: dp, minus: dm })?;
        let g = self.forward(f)?;
        let mut num = vec![0.0; g.len()];
        let mut den = vec![0.0; g.len()];
        for (i, &rho) in self.rho_grid.nodes().iter().enumerate() {
            let (sp, sm) = (g.plus[i] * rho, -g.minus[i] * rho);
            num[i] = (lhs.plus[i] - sp).norm_sqr() + (lhs.minus[i] - sm).norm_sqr();
            den[i] = sp.norm_sqr() + sm.norm_sqr();
        }
        let n = self.channel.n();
        Ok((self.rho_grid.integrate(n, &num) / self.rho_grid.integrate(n, &den)).sqrt())
    }

    /// `‖f‖_{L²(r^{n-1}dr)}`.
    pub fn r_norm(&self, f: &ChannelProfile) -> f64 {
        self.r_grid.integrate(self.channel.n(), &f.density()).sqrt()
    }

    /// `‖g‖_{L²(ρ^{n-1}dρ)}`.
    pub fn rho_norm(&self, g: &ChannelProfile) -> f64 {
        self.rho_grid.integrate(self.channel.n(), &g.density()).sqrt()
    }
}

fn weighted(p: &ChannelProfile, measure: &[f64], bias: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let w = |v: &[Complex64]| v.iter().zip(measure.iter().zip(bias)).map(|(z, (m, b))| z * (m * b)).collect();
    (w(&p.plus), w(&p.minus))
}

fn rescaled(p: ChannelProfile, bias: &[f64]) -> ChannelProfile {
    let s = |v: Vec<Complex64>| v.into_iter().zip(bias).map(|(z, b)| z * b).collect();
    ChannelProfile { plus: s(p.plus), minus: s(p.minus) }
}

fn check_len(p: &ChannelProfile, len: usize, what: &str) -> Result<()> {
    if p.plus.len() != len || p.minus.len() != len {
        return Err(Error::Grid(format!("profile length differs from the {what} grid ({len} nodes)")));
    }
    Ok(())
}

/// Fractions of `∫ density · x^{n-1} dx` in the innermost and outermost bands
/// of width [`TAIL_BAND`].
pub fn tail_fractions(grid: &RadialGrid, n: u8, density: &[f64]) -> (f64, f64) {
    let w = grid.measure(n);
    let total: f64 = w.iter().zip(density).map(|(w, d)| w * d).sum();
    if total <= 0.0 {
        return (0.0, 0.0);
    }
    let (lo, hi) = (grid.r_min() * TAIL_BAND, grid.r_max() / TAIL_BAND);
    let mut inner = 0.0;
    let mut outer = 0.0;
    for ((x, w), d) in grid.nodes().iter().zip(&w).zip(density) {
        if *x <= lo {
            inner += w * d;
        }
        if *x >= hi {
            outer += w * d;
        }
    }
    (inner / total, outer / total)
}

fn check_tails(grid: &RadialGrid, n: u8, density: &[f64], limit: f64, var: &str) -> Result<()> {
    let (inner, outer) = tail_fractions(grid, n, density);
    if outer > limit {
        return Err(Error::Truncation { tail: outer, limit, side: format!("outer {var} band") });
    }
    if inner > limit {
        return Err(Error::Truncation { tail: inner, limit, side: format!("inner {var} band") });
    }
    Ok(())
}

/// Fails with [`Error::Truncation`] when a field carries more than
/// [`TAIL_LIMIT`] of its mass in either end band of its `r` grid.
pub fn check_tails_of(f: &PartialWaveField) -> Result<()> {
    let density = channel_density(f.channels(), f.grid().len());
    check_tails(f.grid(), f.n(), &density, TAIL_LIMIT, "r")
}

/// A field over the energy variable: per-channel `(g^+, g^-)` on a `ρ` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    n: u8,
    rho_grid: RadialGrid,
    channels: ChannelMap,
}

#[derive(Serialize, Deserialize)]
struct SpectralRepr {
    n: u8,
    rho_grid: RadialGrid,
    channels: Vec<ChannelEntry>,
}

impl SpectralField {
    pub fn new(n: u8, rho_grid: RadialGrid) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::DimensionMismatch(format!("n must be 2 or 3, got {n}")));
        }
        Ok(SpectralField { n, rho_grid, channels: ChannelMap::new() })
    }

    pub fn insert(&mut self, index: WaveIndex, profile: ChannelProfile) -> Result<()> {
        check_channel(self.n, self.rho_grid.len(), index, &profile)?;
        self.channels.insert(index, profile);
        Ok(())
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn rho_grid(&self) -> &RadialGrid {
        &self.rho_grid
    }

    pub fn channels(&self) -> &ChannelMap {
        &self.channels
    }

    pub fn channel(&self, index: &WaveIndex) -> Option<&ChannelProfile> {
        self.channels.get(index)
    }

    /// `‖g‖²_{L²(ρ^{n-1}dρ)}` summed over channels and signs.
    pub fn norm_sqr(&self) -> f64 {
        self.rho_grid.integrate(self.n, &channel_density(&self.channels, self.rho_grid.len()))
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `‖ρ^s g‖_{L²(ρ^{n-1}dρ)}`.
    pub fn weighted_norm(&self, s: f64) -> f64 {
        let d = channel_density(&self.channels, self.rho_grid.len());
        let w: Vec<f64> = self.rho_grid.nodes().iter().zip(&d).map(|(rho, d)| rho.powf(2.0 * s) * d).collect();
        self.rho_grid.integrate(self.n, &w).sqrt()
    }

    /// Multiplies `g^+` by `e^{itρ}` and `g^-` by `e^{-itρ}`: the flow `e^{itD_ν}`.
    pub fn evolved(&self, t: f64) -> Self {
        let phases: Vec<Complex64> = self.rho_grid.nodes().iter().map(|rho| Complex64::from_polar(1.0, t * rho)).collect();
        let mut out = self.clone();
        for p in out.channels.values_mut() {
            for (i, e) in phases.iter().enumerate() {
                p.plus[i] *= e;
                p.minus[i] *= e.conj();
            }
        }
        out
    }

    /// JSON document with the field schema, `rho_grid` in place of `grid`.
    pub fn to_json(&self) -> Result<String> {
        let repr = SpectralRepr { n: self.n, rho_grid: self.rho_grid.clone(), channels: entries(&self.channels) };
        Ok(serde_json::to_string(&repr)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let repr: SpectralRepr = serde_json::from_str(s)?;
        let mut f = Self::new(repr.n, repr.rho_grid)?;
        for (ix, p) in from_entries(repr.n, repr.channels)? {
            f.insert(ix, p)?;
        }
        Ok(f)
    }
}

/// Plans for every channel of a field, sharing one pair of grids. Kernels
/// depend on `(k, ν)` only, so 3D channels with different `m_k` share a plan.
#[derive(Debug, Clone)]
pub struct Transformer {
    pub n: u8,
    pub nu: f64,
    r_grid: RadialGrid,
    rho_grid: RadialGrid,
    plans: BTreeMap<i32, Arc<TransformPlan>>,
    source: KernelSource,
}

impl Transformer {
    /// Transformer on the grids of `spec` with plans for `indices`.
    pub fn new(n: u8, nu: f64, spec: &GridSpec, indices: &[WaveIndex]) -> Result<Self> {
        let (r, rho) = spec.grids()?;
        Self::with_grids(n, nu, r, rho, indices, KernelSource::Kummer)
    }

    /// Transformer on explicit grids (log-uniform, common step).
    pub fn with_grids(
        n: u8,
        nu: f64,
        r_grid: RadialGrid,
        rho_grid: RadialGrid,
        indices: &[WaveIndex],
        source: KernelSource,
    ) -> Result<Self> {
        check_pair(&r_grid, &rho_grid)?;
        let mut t = Transformer { n, nu, r_grid, rho_grid, plans: BTreeMap::new(), source };
        t.ensure(indices)?;
        Ok(t)
    }

    /// Transformer for `u`'s channels between its `r` grid and the matched
    /// `ρ` grid at the default oversampling.
    pub fn matched(u: &PartialWaveField, nu: f64, source: KernelSource) -> Result<Self> {
        let rho = matched_rho_grid(u.grid(), DEFAULT_OVERSAMPLING)?;
        let indices: Vec<WaveIndex> = u.channels().keys().copied().collect();
        Self::with_grids(u.n(), nu, u.grid().clone(), rho, &indices, source)
    }

    /// Adds plans for any of `indices` not yet covered.
    pub fn ensure(&mut self, indices: &[WaveIndex]) -> Result<()> {
        let mut missing: Vec<WaveIndex> = Vec::new();
        for ix in indices {
            if ix.n != self.n {
                return Err(Error::DimensionMismatch(format!("{ix} in an n={} transformer", self.n)));
            }
            if !self.plans.contains_key(&ix.two_k()) && !missing.iter().any(|m| m.two_k() == ix.two_k()) {
                missing.push(*ix);
            }
        }
        for ix in missing {
            let base = WaveIndex::from_parts(self.n, ix.k(), None)?;
            let plan = TransformPlan::new(make_channel(base, self.nu)?, self.r_grid.clone(), self.rho_grid.clone(), self.source)?;
            self.plans.insert(ix.two_k(), Arc::new(plan));
        }
        Ok(())
    }

    pub fn r_grid(&self) -> &RadialGrid {
        &self.r_grid
    }

    pub fn rho_grid(&self) -> &RadialGrid {
        &self.rho_grid
    }

    /// The plan serving `index`.
    pub fn plan(&self, index: &WaveIndex) -> Result<&TransformPlan> {
        self.plans
            .get(&index.two_k())
            .map(|p| p.as_ref())
            .ok_or_else(|| Error::InvalidChannel(format!("no transform plan for {index}")))
    }

    /// Transforms every channel of `f`.
    pub fn forward(&self, f: &PartialWaveField) -> Result<SpectralField> {
        self.check_field(f.n(), f.grid(), &self.r_grid)?;
        let mut out = SpectralField::new(self.n, self.rho_grid.clone())?;
        for (ix, p) in f.channels() {
            out.insert(*ix, self.plan(ix)?.forward(p)?)?;
        }
        Ok(out)
    }

    /// Inverts every channel of `g`.
    pub fn inverse(&self, g: &SpectralField) -> Result<PartialWaveField> {
        self.check_field(g.n(), g.rho_grid(), &self.rho_grid)?;
        let mut out = PartialWaveField::new(self.n, self.r_grid.clone())?;
        for (ix, p) in g.channels() {
            out.insert(*ix, self.plan(ix)?.inverse(p)?)?;
        }
        Ok(out)
    }

    /// Forward transform without the `r` tail check, for fields whose support
    /// is controlled by the caller.
    pub(crate) fn forward_trusted(&self, f: &PartialWaveField) -> Result<SpectralField> {
        self.check_field(f.n(), f.grid(), &self.r_grid)?;
        let mut out = SpectralField::new(self.n, self.rho_grid.clone())?;
        for (ix, p) in f.channels() {
            out.insert(*ix, self.plan(ix)?.forward_unchecked(p))?;
        }
        Ok(out)
    }

    /// Inverse without the `ρ` tail check, for spectra already validated.
    pub(crate) fn inverse_trusted(&self, g: &SpectralField) -> Result<PartialWaveField> {
        self.check_field(g.n(), g.rho_grid(), &self.rho_grid)?;
        let mut out = PartialWaveField::new(self.n, self.r_grid.clone())?;
        for (ix, p) in g.channels() {
            out.insert(*ix, self.plan(ix)?.inverse_unchecked(p))?;
        }
        Ok(out)
    }

    fn check_field(&self, n: u8, grid: &RadialGrid, own: &RadialGrid) -> Result<()> {
        if n != self.n {
            return Err(Error::DimensionMismatch(format!("field n={n}, transformer n={}", self.n)));
        }
        if grid != own {
            return Err(Error::Grid("field grid differs from the transformer grid".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(grid: &RadialGrid, center: f64, width: f64) -> ChannelProfile {
        let b: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&r| Complex64::new((-(r - center).powi(2) / (2.0 * width * width)).exp(), 0.0))
            .collect();
        let m: Vec<Complex64> = b.iter().zip(grid.nodes()).map(|(z, r)| z * Complex64::new(0.3, -0.2 * r)).collect();
        ChannelProfile { plus: b, minus: m }
    }

    #[test]
    fn zero_maps_to_zero() {
        let spec = GridSpec::new(6.0, 10.0);
        let plan = TransformPlan::from_spec(WaveIndex::new_2d(0.5).unwrap(), 0.25, &spec).unwrap();
        let g = plan.forward(&ChannelProfile::zeros(plan.r_grid().len())).unwrap();
        assert!(g.is_zero());
        assert!(plan.inverse(&g).unwrap().is_zero());
        assert_eq!(plan.diagonalization_residual(&ChannelProfile::zeros(plan.r_grid().len())).unwrap(), 0.0);
    }

    #[test]
    fn grids_share_the_step() {
        let spec = GridSpec::new(8.0, 12.0);
        let (r, rho) = spec.grids().unwrap();
        assert_eq!(r.log_step(), rho.log_step());
        assert!(r.r_max() >= 8.0 && rho.r_max() >= 12.0);
        assert!((r.r_min() - 8e-9).abs() < 1e-20);
    }

    #[test]
    fn isometry_and_inversion_on_a_ring() {
        let spec = GridSpec::new(6.5, 17.0);
        let plan = TransformPlan::from_spec(WaveIndex::new_3d(-2, None).unwrap(), 0.5, &spec).unwrap();
        let f = ring(plan.r_grid(), 3.0, 0.4);
        let g = plan.forward(&f).unwrap();
        assert!((plan.rho_norm(&g) / plan.r_norm(&f) - 1.0).abs() < 1e-6);
        let back = plan.inverse(&g).unwrap();
        let d = ChannelProfile {
            plus: back.plus.iter().zip(&f.plus).map(|(a, b)| a - b).collect(),
            minus: back.minus.iter().zip(&f.minus).map(|(a, b)| a - b).collect(),
        };
        assert!(plan.r_norm(&d) / plan.r_norm(&f) < 1e-6);
    }

    #[test]
    fn truncation_is_reported() {
        let spec = GridSpec::new(4.0, 14.0);
        let plan = TransformPlan::from_spec(WaveIndex::new_2d(1.5).unwrap(), 0.0, &spec).unwrap();
        let f = ring(plan.r_grid(), 3.5, 0.4);
        assert!(matches!(plan.forward(&f), Err(Error::Truncation { .. })));
    }

    #[test]
    fn rejects_mismatched_steps() {
        let r = RadialGrid::log_uniform_count(0.01, 0.01, 100);
        let rho = RadialGrid::log_uniform_count(0.01, 0.02, 100);
        let ch = make_channel(WaveIndex::new_2d(0.5).unwrap(), 0.0).unwrap();
        assert!(TransformPlan::new(ch.clone(), r.clone(), rho, KernelSource::Kummer).is_err());
        let rho = RadialGrid::log_uniform_count(0.01, 0.01, 50);
        let coupled = make_channel(WaveIndex::new_2d(0.5).unwrap(), 0.2).unwrap();
        assert!(TransformPlan::new(coupled, r, rho, KernelSource::Bessel).is_err());
    }
}
