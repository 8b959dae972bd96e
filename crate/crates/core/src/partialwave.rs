//! Partial-wave decomposition of spinor fields.
//!
//! 2D: `Ξ^+_k = (e^{i(k-1/2)θ}, 0)/√(2π)`, `Ξ^-_k = (0, e^{i(k+1/2)θ})/√(2π)`,
//! `k ∈ ℤ + 1/2`. 3D: `Ξ^+_{k,m} = (iΩ_{k,m}, 0)`, `Ξ^-_{k,m} = (0, Ω_{-k,m})`
//! with the spinor harmonics
//!
//! ```text
//! Ω_{k,m} = |2k+1|^{-1/2} ( √|k-m+1/2| Y_l^{m-1/2},  sgn(-k) √|k+m+1/2| Y_l^{m+1/2} ),
//! l = |k+1/2| - 1/2,
//! ```
//!
//! and `Y_l^m` the Condon–Shortley spherical harmonics. On each channel the
//! Dirac–Coulomb operator acts through the radial matrix
//!
//! ```text
//! d_{ν,k} = [ -ν/r                      -(d/dr + (n-1)/(2r)) + k/r ]
//!           [ d/dr + (n-1)/(2r) + k/r   -ν/r                       ].
//! ```
//!
//! In 2D the basis obeys `∂_θ Ξ^±_k = i(k ∓ 1/2) Ξ^±_k`; the factor `i` is
//! sometimes omitted in the literature and does not affect any `|·|²` identity.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::WaveIndex;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::quadrature::gauss_legendre;

/// Pauli matrices `σ_j`, Dirac matrices `α_j = [[0, σ_j], [σ_j, 0]]` and
/// `β = diag(1, 1, -1, -1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordBasis {
    pub pauli: [[[Complex64; 2]; 2]; 3],
    pub dirac: [[[Complex64; 4]; 4]; 3],
    pub beta: [[Complex64; 4]; 4],
}

impl CliffordBasis {
    pub fn standard() -> Self {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        let pauli = [[[z, o], [o, z]], [[z, -i], [i, z]], [[o, z], [z, -o]]];
        let mut dirac = [[[z; 4]; 4]; 3];
        for (a, s) in dirac.iter_mut().zip(&pauli) {
            for r in 0..2 {
                for c in 0..2 {
                    a[r][c + 2] = s[r][c];
                    a[r + 2][c] = s[r][c];
                }
            }
        }
        let mut beta = [[z; 4]; 4];
        for (d, row) in beta.iter_mut().enumerate() {
            row[d] = if d < 2 { o } else { -o };
        }
        CliffordBasis { pauli, dirac, beta }
    }

    /// Largest entry of `A_j A_k + A_k A_j − 2δ_{jk} I` over both families,
    /// together with `β² − I` and `α_j β + β α_j`.
    pub fn anticommutation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                let d = if j == k { 2.0 } else { 0.0 };
                let p = add(&mul(&self.pauli[j], &self.pauli[k]), &mul(&self.pauli[k], &self.pauli[j]));
                worst = worst.max(defect(&p, d));
                let a = add(&mul(&self.dirac[j], &self.dirac[k]), &mul(&self.dirac[k], &self.dirac[j]));
                worst = worst.max(defect(&a, d));
            }
            let ab = add(&mul(&self.dirac[j], &self.beta), &mul(&self.beta, &self.dirac[j]));
            worst = worst.max(defect(&ab, 0.0));
        }
        worst.max(defect(&mul(&self.beta, &self.beta), 1.0))
    }
}

fn mul<const N: usize>(a: &[[Complex64; N]; N], b: &[[Complex64; N]; N]) -> [[Complex64; N]; N] {
    let mut out = [[Complex64::new(0.0, 0.0); N]; N];
    for r in 0..N {
        for c in 0..N {
            out[r][c] = (0..N).map(|t| a[r][t] * b[t][c]).sum();
        }
    }
    out
}

fn add<const N: usize>(a: &[[Complex64; N]; N], b: &[[Complex64; N]; N]) -> [[Complex64; N]; N] {
    let mut out = *a;
    for r in 0..N {
        for c in 0..N {
            out[r][c] += b[r][c];
        }
    }
    out
}

fn defect<const N: usize>(a: &[[Complex64; N]; N], diag: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..N {
        for c in 0..N {
            let target = if r == c { diag } else { 0.0 };
            worst = worst.max((a[r][c] - target).norm());
        }
    }
    worst
}

/// Which basis element of a channel: `Ξ^+` or `Ξ^-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    Plus,
    Minus,
}

impl Component {
    pub const BOTH: [Component; 2] = [Component::Plus, Component::Minus];
}

/// A point on the unit sphere: `θ ∈ [0, 2π)` in 2D, `(θ, φ)` (polar, azimuth) in 3D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angles {
    Circle(f64),
    Sphere { theta: f64, phi: f64 },
}

impl Angles {
    pub fn dimension(&self) -> u8 {
        match self {
            Angles::Circle(_) => 2,
            Angles::Sphere { .. } => 3,
        }
    }
}

/// Number of spinor components: 2 in 2D, 4 in 3D.
pub fn spinor_len(n: u8) -> usize {
    if n == 2 {
        2
    } else {
        4
    }
}

/// `Y_l^m(θ, φ)` with the Condon–Shortley phase, normalized on the sphere.
/// Returns zero when `|m| > l` or `l < 0`.
pub fn spherical_harmonic(l: i32, m: i32, theta: f64, phi: f64) -> Complex64 {
    if l < 0 || m.abs() > l {
        return Complex64::new(0.0, 0.0);
    }
    let am = m.abs();
    let x = theta.cos();
    let s = theta.sin().abs();
    // normalized P_m^m
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for i in 1..=am {
        let i = i as f64;
        pmm *= -((2.0 * i + 1.0) / (2.0 * i)).sqrt() * s;
    }
    let p = if l == am {
        pmm
    } else {
        let mut p_prev = pmm;
        let mut p_cur = x * (2.0 * am as f64 + 3.0).sqrt() * pmm;
        for ll in (am + 2)..=l {
            let lf = ll as f64;
            let mf = am as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let lp = lf - 1.0;
            let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
            let next = a * (x * p_cur - p_prev / a_prev);
            p_prev = p_cur;
            p_cur = next;
        }
        p_cur
    };
    let y = Complex64::from_polar(p, am as f64 * phi);
    if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// `Ω_{k,m}` as a 2-spinor; `two_k`, `two_m` are doubled quantum numbers.
fn omega(two_k: i32, two_m: i32, theta: f64, phi: f64) -> [Complex64; 2] {
    let k = two_k as f64 / 2.0;
    let m = two_m as f64 / 2.0;
    // l = |k + 1/2| - 1/2
    let l = ((two_k + 1).abs() - 1) / 2;
    let norm = 1.0 / (2.0 * k + 1.0).abs().sqrt();
    let up = (k - m + 0.5).abs().sqrt() * norm;
    let sgn = if k < 0.0 { 1.0 } else { -1.0 };
    let down = sgn * (k + m + 0.5).abs().sqrt() * norm;
    let m_lo = (two_m - 1) / 2;
    let m_hi = (two_m + 1) / 2;
    [
        spherical_harmonic(l, m_lo, theta, phi) * up,
        spherical_harmonic(l, m_hi, theta, phi) * down,
    ]
}

/// Samples `Ξ^±` of `index` at `angles`.
///
/// 3D indices must carry `m_k`.
pub fn angular_basis(index: WaveIndex, component: Component, angles: Angles) -> Result<Vec<Complex64>> {
    if angles.dimension() != index.n {
        return Err(Error::DimensionMismatch(format!("angles for n={} used with {}", angles.dimension(), index)));
    }
    let zero = Complex64::new(0.0, 0.0);
    match angles {
        Angles::Circle(theta) => {
            let c = 1.0 / (2.0 * PI).sqrt();
            let k = index.k();
            Ok(match component {
                Component::Plus => vec![Complex64::from_polar(c, (k - 0.5) * theta), zero],
                Component::Minus => vec![zero, Complex64::from_polar(c, (k + 0.5) * theta)],
            })
        }
        Angles::Sphere { theta, phi } => {
            let two_m = index
                .two_m()
                .ok_or_else(|| Error::InvalidChannel(format!("3D basis needs m_k: {index}")))?;
            Ok(match component {
                Component::Plus => {
                    let o = omega(index.two_k(), two_m, theta, phi);
                    vec![Complex64::i() * o[0], Complex64::i() * o[1], zero, zero]
                }
                Component::Minus => {
                    let o = omega(-index.two_k(), two_m, theta, phi);
                    vec![zero, zero, o[0], o[1]]
                }
            })
        }
    }
}

/// All channels with `|k| <= k_max` (and every `m_k` in 3D), in index order.
pub fn channel_indices(n: u8, k_max: f64) -> Result<Vec<WaveIndex>> {
    let mut out = Vec::new();
    match n {
        2 => {
            let top = (k_max - 0.5).floor() as i32;
            for j in -(top + 1)..=top {
                out.push(WaveIndex::new_2d(j as f64 + 0.5)?);
            }
        }
        3 => {
            let top = k_max.floor() as i32;
            for k in (-top..=top).filter(|&k| k != 0) {
                let two_top = 2 * k.abs() - 1;
                for two_m in (-two_top..=two_top).step_by(2) {
                    out.push(WaveIndex::new_3d(k, Some(two_m as f64 / 2.0))?);
                }
            }
        }
        _ => return Err(Error::DimensionMismatch(format!("n must be 2 or 3, got {n}"))),
    }
    if out.is_empty() {
        return Err(Error::InvalidChannel(format!("k_max = {k_max} admits no channel")));
    }
    out.sort();
    Ok(out)
}

/// Quadrature on the sphere: trapezoid in `θ` (2D); Gauss–Legendre in `cos θ`
/// times trapezoid in `φ` (3D).
#[derive(Debug, Clone)]
pub struct AngularQuadrature {
    pub n: u8,
    pub points: Vec<Angles>,
    pub weights: Vec<f64>,
}

impl AngularQuadrature {
    /// `count` equispaced nodes on the circle.
    pub fn circle(count: usize) -> Self {
        let w = 2.0 * PI / count as f64;
        let points = (0..count).map(|j| Angles::Circle(j as f64 * w)).collect();
        AngularQuadrature { n: 2, points, weights: vec![w; count] }
    }

    /// `n_theta` Gauss–Legendre nodes in `cos θ` times `n_phi` nodes in `φ`.
    pub fn sphere(n_theta: usize, n_phi: usize) -> Self {
        let (x, w) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut points = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (xi, wi) in x.iter().zip(&w) {
            let theta = xi.acos();
            for j in 0..n_phi {
                points.push(Angles::Sphere { theta, phi: j as f64 * dphi });
                weights.push(wi * dphi);
            }
        }
        AngularQuadrature { n: 3, points, weights }
    }

    /// A rule exact for products of two fields band-limited to `2 k_max + 1`
    /// angular frequencies (twice the basis band).
    pub fn for_band(n: u8, k_max: f64) -> Result<Self> {
        match n {
            2 => {
                let top = (k_max + 0.5).ceil() as usize;
                Ok(Self::circle(4 * top + 4))
            }
            3 => {
                let l = k_max.ceil() as usize;
                Ok(Self::sphere(2 * l + 2, 4 * l + 4))
            }
            _ => Err(Error::DimensionMismatch(format!("n must be 2 or 3, got {n}"))),
        }
    }

    /// Gram matrix `⟨Ξ_a, Ξ_b⟩` over `(index, component)` pairs.
    pub fn gram(&self, basis: &[(WaveIndex, Component)]) -> Result<Vec<Vec<Complex64>>> {
        let samples = self.sample(basis)?;
        let m = basis.len();
        let mut g = vec![vec![Complex64::new(0.0, 0.0); m]; m];
        for a in 0..m {
            for b in 0..m {
                g[a][b] = self.inner(&samples[a], &samples[b]);
            }
        }
        Ok(g)
    }

    fn sample(&self, basis: &[(WaveIndex, Component)]) -> Result<Vec<Vec<Vec<Complex64>>>> {
        basis
            .iter()
            .map(|&(ix, c)| self.points.iter().map(|&p| angular_basis(ix, c, p)).collect())
            .collect()
    }

    /// `∫ ⟨a, b⟩ dσ = Σ w conj(a)·b`.
    fn inner(&self, a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Complex64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| x.iter().zip(y).map(|(x, y)| x.conj() * y).sum::<Complex64>() * *w)
            .sum()
    }
}

/// Radial profiles `(φ^+_k, φ^-_k)` of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

impl ChannelProfile {
    pub fn zeros(len: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); len];
        ChannelProfile { plus: z.clone(), minus: z }
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.plus.iter().chain(&self.minus).all(|z| *z == Complex64::new(0.0, 0.0))
    }

    /// Pointwise `|φ^+|² + |φ^-|²`.
    pub fn density(&self) -> Vec<f64> {
        self.plus.iter().zip(&self.minus).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect()
    }
}

/// Per-channel data over a radial variable, shared by position- and
/// energy-space fields.
pub type ChannelMap = BTreeMap<WaveIndex, ChannelProfile>;

/// A spinor field `Σ φ^+_k(r) Ξ^+_k + φ^-_k(r) Ξ^-_k` on a radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialWaveField {
    n: u8,
    grid: RadialGrid,
    channels: ChannelMap,
}

impl PartialWaveField {
    /// Field with no channels.
    pub fn new(n: u8, grid: RadialGrid) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::DimensionMismatch(format!("n must be 2 or 3, got {n}")));
        }
        Ok(PartialWaveField { n, grid, channels: ChannelMap::new() })
    }

    /// Field from a channel map, validating dimensions and lengths.
    pub fn from_channels(n: u8, grid: RadialGrid, channels: ChannelMap) -> Result<Self> {
        let mut f = Self::new(n, grid)?;
        for (ix, p) in channels {
            f.insert(ix, p)?;
        }
        Ok(f)
    }

    /// Single-channel field `φ^+ Ξ^+ + φ^- Ξ^-`.
    pub fn single(index: WaveIndex, grid: RadialGrid, profile: ChannelProfile) -> Result<Self> {
        let mut f = Self::new(index.n, grid)?;
        f.insert(index, profile)?;
        Ok(f)
    }

    pub fn insert(&mut self, index: WaveIndex, profile: ChannelProfile) -> Result<()> {
        check_channel(self.n, self.grid.len(), index, &profile)?;
        self.channels.insert(index, profile);
        Ok(())
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn channels(&self) -> &ChannelMap {
        &self.channels
    }

    pub fn channel(&self, index: &WaveIndex) -> Option<&ChannelProfile> {
        self.channels.get(index)
    }

    pub fn into_channels(self) -> ChannelMap {
        self.channels
    }

    /// Same grid and channel set, all profiles zero.
    pub fn zeros_like(&self) -> Self {
        let channels = self.channels.keys().map(|&k| (k, ChannelProfile::zeros(self.grid.len()))).collect();
        PartialWaveField { n: self.n, grid: self.grid.clone(), channels }
    }

    /// `Σ_k |φ^+_k|² + |φ^-_k|²` at each node, i.e. `∫_{S^{n-1}} |Φ(r·)|² dσ`.
    pub fn angular_density(&self) -> Vec<f64> {
        channel_density(&self.channels, self.grid.len())
    }

    /// `‖Φ‖²_{L²(ℝ^n)}`.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.integrate(self.n, &self.angular_density())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩_{L²}` over channels present in both.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_compatible(other)?;
        let w = self.grid.measure(self.n);
        let mut acc = Complex64::new(0.0, 0.0);
        for (ix, a) in &self.channels {
            if let Some(b) = other.channels.get(ix) {
                for j in 0..w.len() {
                    acc += (a.plus[j].conj() * b.plus[j] + a.minus[j].conj() * b.minus[j]) * w[j];
                }
            }
        }
        Ok(acc)
    }

    /// `a·self + b·other`, over the union of channels.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.check_compatible(other)?;
        let len = self.grid.len();
        let mut out = self.zeros_like();
        for ix in other.channels.keys() {
            out.channels.entry(*ix).or_insert_with(|| ChannelProfile::zeros(len));
        }
        for (ix, p) in out.channels.iter_mut() {
            let zero = ChannelProfile::zeros(len);
            let x = self.channels.get(ix).unwrap_or(&zero);
            let y = other.channels.get(ix).unwrap_or(&zero);
            for j in 0..len {
                p.plus[j] = a * x.plus[j] + b * y.plus[j];
                p.minus[j] = a * x.minus[j] + b * y.minus[j];
            }
        }
        Ok(out)
    }

    /// `c·self`.
    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for p in out.channels.values_mut() {
            p.plus.iter_mut().chain(p.minus.iter_mut()).for_each(|z| *z *= c);
        }
        out
    }

    /// Multiplies every profile by the real radial function `v(r_j)`.
    pub fn multiply_radial(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.grid.len() {
            return Err(Error::Grid("radial multiplier length differs from the grid".into()));
        }
        let mut out = self.clone();
        for p in out.channels.values_mut() {
            for j in 0..v.len() {
                p.plus[j] *= v[j];
                p.minus[j] *= v[j];
            }
        }
        Ok(out)
    }

    /// `u_λ(x) = λ^{-n/2} u(x/λ)`: the `L²`-preserving dilation, on the grid
    /// scaled by `λ`.
    pub fn dilated(&self, lambda: f64) -> Result<Self> {
        let grid = self.grid.dilated(lambda)?;
        let c = lambda.powf(-(self.n as f64) / 2.0);
        let channels = self
            .channels
            .iter()
            .map(|(ix, p)| {
                let s = |v: &[Complex64]| v.iter().map(|z| z * c).collect();
                (*ix, ChannelProfile { plus: s(&p.plus), minus: s(&p.minus) })
            })
            .collect();
        Ok(PartialWaveField { n: self.n, grid, channels })
    }

    /// True when every channel outside the lowest `|k|` is absent or zero.
    pub fn is_dirac_radial(&self) -> bool {
        self.channels.iter().all(|(ix, p)| ix.is_dirac_radial() || p.is_zero())
    }

    /// True when every lowest-`|k|` channel is absent or zero.
    pub fn is_dirac_nonradial(&self) -> bool {
        self.channels.iter().all(|(ix, p)| !ix.is_dirac_radial() || p.is_zero())
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("n = {} vs {}", self.n, other.n)));
        }
        if self.grid != other.grid {
            return Err(Error::Grid("fields live on different grids".into()));
        }
        Ok(())
    }

    /// JSON document `{n, grid, channels[{k, m_k?, f_plus, f_minus}]}`;
    /// floats round-trip bit-exactly.
    pub fn to_json(&self) -> Result<String> {
        let repr = FieldRepr { n: self.n, grid: self.grid.clone(), channels: entries(&self.channels) };
        Ok(serde_json::to_string(&repr)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let repr: FieldRepr = serde_json::from_str(s)?;
        Self::from_channels(repr.n, repr.grid, from_entries(repr.n, repr.channels)?)
    }
}

pub(crate) fn channel_density(channels: &ChannelMap, len: usize) -> Vec<f64> {
    let mut d = vec![0.0; len];
    for p in channels.values() {
        for (acc, x) in d.iter_mut().zip(p.density()) {
            *acc += x;
        }
    }
    d
}

pub(crate) fn check_channel(n: u8, len: usize, index: WaveIndex, p: &ChannelProfile) -> Result<()> {
    if index.n != n {
        return Err(Error::DimensionMismatch(format!("{index} in an n={n} field")));
    }
    if n == 3 && index.two_m().is_none() {
        return Err(Error::InvalidChannel(format!("3D field channels need m_k: {index}")));
    }
    if p.plus.len() != len || p.minus.len() != len {
        return Err(Error::Grid(format!("profile length differs from grid length {len} at {index}")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
pub(crate) struct ChannelEntry {
    pub k: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m_k: Option<f64>,
    pub f_plus: Vec<Complex64>,
    pub f_minus: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    n: u8,
    grid: RadialGrid,
    channels: Vec<ChannelEntry>,
}

pub(crate) fn entries(channels: &ChannelMap) -> Vec<ChannelEntry> {
    channels
        .iter()
        .map(|(ix, p)| ChannelEntry { k: ix.k(), m_k: ix.m(), f_plus: p.plus.clone(), f_minus: p.minus.clone() })
        .collect()
}

pub(crate) fn from_entries(n: u8, entries: Vec<ChannelEntry>) -> Result<ChannelMap> {
    let mut map = ChannelMap::new();
    for e in entries {
        let ix = WaveIndex::from_parts(n, e.k, e.m_k)?;
        if map.insert(ix, ChannelProfile { plus: e.f_plus, minus: e.f_minus }).is_some() {
            return Err(Error::InvalidChannel(format!("duplicate channel {ix}")));
        }
    }
    Ok(map)
}

/// Result of [`decompose`]: the field and the fraction of angular energy not
/// captured by the retained channels.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub field: PartialWaveField,
    pub residual_fraction: f64,
}

/// Residual fraction above which [`decompose`] logs an aliasing warning.
pub const ALIASING_WARNING: f64 = 0.01;

/// Projects `sampler(r, angles)` (a 2- or 4-spinor) onto all channels with
/// `|k| <= k_max`: `φ^±_k(r_j) = ⟨Φ(r_j,·), Ξ^±_k⟩_{L²(S^{n-1})}`.
pub fn decompose<F>(n: u8, grid: &RadialGrid, sampler: F, k_max: f64) -> Result<Decomposition>
where
    F: Fn(f64, Angles) -> Vec<Complex64> + Sync,
{
    let quad = AngularQuadrature::for_band(n, k_max)?;
    let indices = channel_indices(n, k_max)?;
    let basis: Vec<(WaveIndex, Component)> =
        indices.iter().flat_map(|&ix| Component::BOTH.map(|c| (ix, c))).collect();
    let samples = quad.sample(&basis)?;
    let dim = spinor_len(n);
    let rows: Vec<Result<(Vec<Complex64>, f64)>> = grid
        .nodes()
        .par_iter()
        .map(|&r| {
            let field: Vec<Vec<Complex64>> = quad
                .points
                .iter()
                .map(|&p| {
                    let v = sampler(r, p);
                    if v.len() != dim {
                        return Err(Error::DimensionMismatch(format!("sampler returned {} components, expected {dim}", v.len())));
                    }
                    Ok(v)
                })
                .collect::<Result<_>>()?;
            let total = quad.inner(&field, &field).re;
            let coeffs: Vec<Complex64> = samples.iter().map(|b| quad.inner(b, &field)).collect();
            Ok((coeffs, total))
        })
        .collect();
    let mut channels: ChannelMap = indices.iter().map(|&ix| (ix, ChannelProfile::zeros(grid.len()))).collect();
    let mut total = vec![0.0; grid.len()];
    for (j, row) in rows.into_iter().enumerate() {
        let (coeffs, t) = row?;
        total[j] = t;
        for (b, &(ix, c)) in basis.iter().enumerate() {
            let p = channels.get_mut(&ix).expect("channel present");
            match c {
                Component::Plus => p.plus[j] = coeffs[b],
                Component::Minus => p.minus[j] = coeffs[b],
            }
        }
    }
    let field = PartialWaveField::from_channels(n, grid.clone(), channels)?;
    let all = grid.integrate(n, &total);
    let kept = field.norm_sqr();
    let residual_fraction = if all > 0.0 { ((all - kept) / all).max(0.0) } else { 0.0 };
    if residual_fraction > ALIASING_WARNING {
        log::warn!("decompose: {:.2}% of the angular energy lies beyond k_max = {k_max}", 100.0 * residual_fraction);
    }
    Ok(Decomposition { field, residual_fraction })
}

/// Evaluates `Σ φ^±_k(r_j) Ξ^±_k(angles_a)`; the result is indexed `[j][a][component]`.
pub fn reconstruct(pwf: &PartialWaveField, angles: &[Angles]) -> Result<Vec<Vec<Vec<Complex64>>>> {
    let dim = spinor_len(pwf.n);
    let mut basis = Vec::new();
    for (&ix, p) in pwf.channels() {
        let plus: Vec<Vec<Complex64>> = angles.iter().map(|&a| angular_basis(ix, Component::Plus, a)).collect::<Result<_>>()?;
        let minus: Vec<Vec<Complex64>> = angles.iter().map(|&a| angular_basis(ix, Component::Minus, a)).collect::<Result<_>>()?;
        basis.push((p, plus, minus));
    }
    Ok((0..pwf.grid.len())
        .map(|j| {
            angles
                .iter()
                .enumerate()
                .map(|(a, _)| {
                    let mut v = vec![Complex64::new(0.0, 0.0); dim];
                    for (p, plus, minus) in &basis {
                        for c in 0..dim {
                            v[c] += p.plus[j] * plus[a][c] + p.minus[j] * minus[a][c];
                        }
                    }
                    v
                })
                .collect()
        })
        .collect())
}

/// Relative end-value tolerance of [`apply_radial_dirac`].
pub const SUPPORT_TOLERANCE: f64 = 1e-6;

/// Fourth-order derivative in `u = ln r` (centered inside, one-sided at the ends).
pub(crate) fn d_du(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let c = 1.0 / (12.0 * h);
    // one-sided closures read forward from the left end, mirrored at the right
    let closure = |g: &dyn Fn(usize) -> Complex64, offset: usize| {
        if offset == 0 {
            -25.0 * g(0) + 48.0 * g(1) - 36.0 * g(2) + 16.0 * g(3) - 3.0 * g(4)
        } else {
            -3.0 * g(0) - 10.0 * g(1) + 18.0 * g(2) - 6.0 * g(3) + g(4)
        }
    };
    (0..n)
        .map(|j| {
            let s = if j < 2 {
                closure(&|i| f[i], j)
            } else if j + 2 >= n {
                -closure(&|i| f[n - 1 - i], n - 1 - j)
            } else {
                f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]
            };
            s * c
        })
        .collect()
}

/// Applies `d_{ν,k}` to `(f^+, f^-)` by fourth-order differences in `ln r`.
///
/// The grid must be log-uniform with at least 5 nodes, and the profiles must
/// vanish at both ends (relative to their maximum, within [`SUPPORT_TOLERANCE`]).
pub fn apply_radial_dirac(
    index: WaveIndex,
    nu: f64,
    f_plus: &[Complex64],
    f_minus: &[Complex64],
    grid: &RadialGrid,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let h = grid.require_log_step()?;
    let len = grid.len();
    if f_plus.len() != len || f_minus.len() != len {
        return Err(Error::Grid("profile length differs from the grid".into()));
    }
    if len < 5 {
        return Err(Error::Grid("radial differences need at least 5 nodes".into()));
    }
    let peak = f_plus.iter().chain(f_minus).map(|z| z.norm()).fold(0.0, f64::max);
    let ends = [f_plus[0], f_plus[len - 1], f_minus[0], f_minus[len - 1]];
    if ends.iter().any(|z| z.norm() > SUPPORT_TOLERANCE * peak) {
        return Err(Error::SupportViolation(format!(
            "end values up to {:e} against peak {:e}",
            ends.iter().map(|z| z.norm()).fold(0.0, f64::max),
            peak
        )));
    }
    let k = index.k();
    let half = (index.n as f64 - 1.0) / 2.0;
    let dp = d_du(f_plus, h);
    let dm = d_du(f_minus, h);
    let mut g_plus = Vec::with_capacity(len);
    let mut g_minus = Vec::with_capacity(len);
    for (j, &r) in grid.nodes().iter().enumerate() {
        let inv = 1.0 / r;
        g_plus.push(inv * (-nu * f_plus[j] - dm[j] + (k - half) * f_minus[j]));
        g_minus.push(inv * (dp[j] + (k + half) * f_plus[j] - nu * f_minus[j]));
    }
    Ok((g_plus, g_minus))
}

/// Keeps only the lowest channels (`|k| = 1/2` in 2D, `|k| = 1` in 3D).
pub fn project_dirac_radial(pwf: &PartialWaveField) -> PartialWaveField {
    project(pwf, true)
}

/// Zeroes the lowest channels.
pub fn project_dirac_nonradial(pwf: &PartialWaveField) -> PartialWaveField {
    project(pwf, false)
}

fn project(pwf: &PartialWaveField, radial: bool) -> PartialWaveField {
    let mut out = pwf.clone();
    for (ix, p) in out.channels.iter_mut() {
        if ix.is_dirac_radial() != radial {
            *p = ChannelProfile::zeros(p.len());
        }
    }
    out
}
