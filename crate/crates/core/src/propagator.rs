//! The exact flow `e^{itD_ν}`: per channel, transform to energy space, apply
//! `e^{itρσ₃}`, transform back. Time enters only through exact phases, so
//! the only error is quadrature.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::WaveIndex;
use crate::error::{Error, Result};
use crate::hankel::{check_tails_of, GridSpec, KernelSource, SpectralField, Transformer};
use crate::partialwave::{ChannelProfile, PartialWaveField};

/// Whether a trajectory is a free (linear) flow or a nonlinear solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Linear,
    Nonlinear,
}

/// States `u(t_i)` on a shared grid and channel set.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<PartialWaveField>,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryIndex {
    provenance: Provenance,
    /// `(t, sidecar file name)` per node.
    states: Vec<(f64, String)>,
}

impl Trajectory {
    /// Validates ascending times, matching lengths, and a common grid and
    /// channel set.
    pub fn new(times: Vec<f64>, states: Vec<PartialWaveField>, provenance: Provenance) -> Result<Self> {
        if times.len() != states.len() || times.is_empty() {
            return Err(Error::Domain(format!("{} times for {} states", times.len(), states.len())));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("trajectory times must be finite and strictly ascending".into()));
        }
        let first = &states[0];
        for s in &states[1..] {
            s.check_compatible(first)?;
            if !s.channels().keys().eq(first.channels().keys()) {
                return Err(Error::InvalidChannel("trajectory states carry different channel sets".into()));
            }
        }
        Ok(Trajectory { times, states, provenance })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PartialWaveField] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n(&self) -> u8 {
        self.states[0].n()
    }

    /// Writes `<stem>.json` (the `(t, file)` index) and one sidecar
    /// `<stem>.<i>.json` per node into `dir`; returns the index path.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let mut entries = Vec::with_capacity(self.len());
        for (i, (t, s)) in self.times.iter().zip(&self.states).enumerate() {
            let name = format!("{stem}.{i:04}.json");
            std::fs::write(dir.join(&name), s.to_json()?)?;
            entries.push((*t, name));
        }
        let index = TrajectoryIndex { provenance: self.provenance, states: entries };
        let path = dir.join(format!("{stem}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&index)?)?;
        Ok(path)
    }

    /// Reads a trajectory written by [`Trajectory::write`].
    pub fn read(index_path: &Path) -> Result<Self> {
        let index: TrajectoryIndex = serde_json::from_str(&std::fs::read_to_string(index_path)?)?;
        let dir = index_path.parent().unwrap_or_else(|| Path::new("."));
        let mut times = Vec::with_capacity(index.states.len());
        let mut states = Vec::with_capacity(index.states.len());
        for (t, name) in index.states {
            times.push(t);
            states.push(PartialWaveField::from_json(&std::fs::read_to_string(dir.join(name))?)?);
        }
        Self::new(times, states, index.provenance)
    }
}

/// A datum's spectrum with the transforms needed to evaluate `e^{itD_ν} u₀`
/// at any `t`.
#[derive(Debug, Clone)]
pub struct Propagator {
    transformer: Transformer,
    spectrum: SpectralField,
}

impl Propagator {
    /// Transforms `u0` once, on the `ρ` grid matched to its `r` grid.
    pub fn new(u0: &PartialWaveField, nu: f64) -> Result<Self> {
        Self::with_source(u0, nu, KernelSource::Kummer)
    }

    /// As [`Propagator::new`] with an explicit kernel route.
    pub fn with_source(u0: &PartialWaveField, nu: f64, source: KernelSource) -> Result<Self> {
        Self::with_transformer(u0, Transformer::matched(u0, nu, source)?)
    }

    /// Reuses an existing transformer (its `r` grid must be `u0`'s).
    pub fn with_transformer(u0: &PartialWaveField, mut transformer: Transformer) -> Result<Self> {
        let indices: Vec<WaveIndex> = u0.channels().keys().copied().collect();
        transformer.ensure(&indices)?;
        let spectrum = transformer.forward(u0)?;
        Ok(Propagator { transformer, spectrum })
    }

    pub fn spectrum(&self) -> &SpectralField {
        &self.spectrum
    }

    pub fn transformer(&self) -> &Transformer {
        &self.transformer
    }

    /// `e^{itD_ν} u₀`. Fails with a truncation error when the evolved field
    /// reaches the outer band of the grid.
    pub fn at(&self, t: f64) -> Result<PartialWaveField> {
        let u = self.transformer.inverse_trusted(&self.spectrum.evolved(t))?;
        check_tails_of(&u)?;
        Ok(u)
    }

    /// `e^{itD_ν} u₀` at every node of `times`.
    pub fn trajectory(&self, times: &[f64]) -> Result<Trajectory> {
        let states: Vec<PartialWaveField> = times.par_iter().map(|&t| self.at(t)).collect::<Result<_>>()?;
        Trajectory::new(times.to_vec(), states, Provenance::Linear)
    }
}

/// `e^{itD_ν} u₀`.
pub fn evolve(u0: &PartialWaveField, nu: f64, t: f64) -> Result<PartialWaveField> {
    Propagator::new(u0, nu)?.at(t)
}

/// `e^{itD_ν} u₀` on a time grid, transforming `u₀` once.
pub fn evolve_trajectory(u0: &PartialWaveField, nu: f64, times: &[f64]) -> Result<Trajectory> {
    Propagator::new(u0, nu)?.trajectory(times)
}

/// `count` uniform nodes on `[t0, t1]`.
pub fn uniform_times(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| t0 + (t1 - t0) * i as f64 / (count - 1).max(1) as f64).collect()
}

/// The single-channel field `P_k^{-1}[profile]` on the grids of `spec`.
/// `profile(ρ) = (g^+, g^-)` should vanish outside the `ρ` range.
pub fn band_limited_datum<F>(index: WaveIndex, nu: f64, profile: F, spec: &GridSpec) -> Result<PartialWaveField>
where
    F: Fn(f64) -> (Complex64, Complex64),
{
    let (r, rho) = spec.grids()?;
    let transformer = Transformer::with_grids(index.n, nu, r.clone(), rho.clone(), &[index], KernelSource::Kummer)?;
    let (plus, minus): (Vec<Complex64>, Vec<Complex64>) = rho.nodes().iter().map(|&x| profile(x)).unzip();
    let mut g = SpectralField::new(index.n, rho)?;
    g.insert(index, ChannelProfile { plus, minus })?;
    let u = transformer.inverse(&g)?;
    check_tails_of(&u)?;
    Ok(u)
}

/// `C^∞` bump supported in `[a, b]` with peak 1: `e · exp(−1/(1−t²))`, `t` the
/// affine image of `x` in `[−1, 1]`.
pub fn smooth_bump(a: f64, b: f64, x: f64) -> f64 {
    let t = (2.0 * x - a - b) / (b - a);
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Gaussian ring `exp(−(r−c)²/(2w²))` sampled on the grid of a field.
pub fn gaussian_ring(nodes: &[f64], center: f64, width: f64) -> Vec<f64> {
    nodes.iter().map(|&r| (-(r - center).powi(2) / (2.0 * width * width)).exp()).collect()
}

/// Single-channel field `(a·ring, b·ring)` on `spec`'s `r` grid — spatially
/// localized and, for `ρ_max·width ≳ 5`, effectively band-limited.
pub fn ring_datum(index: WaveIndex, spec: &GridSpec, center: f64, width: f64, a: Complex64, b: Complex64) -> Result<PartialWaveField> {
    let (r, _) = spec.grids()?;
    let ring = gaussian_ring(r.nodes(), center, width);
    let profile = ChannelProfile { plus: ring.iter().map(|x| a * x).collect(), minus: ring.iter().map(|x| b * x).collect() };
    PartialWaveField::single(index, r, profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn datum() -> PartialWaveField {
        let spec = GridSpec::new(7.0, 16.0);
        ring_datum(WaveIndex::new_3d(1, Some(0.5)).unwrap(), &spec, 3.0, 0.4, c(1.0, 0.0), c(0.0, 0.5)).unwrap()
    }

    #[test]
    fn time_zero_returns_the_datum() {
        let u0 = datum();
        let u = evolve(&u0, 0.5, 0.0).unwrap();
        let d = u.combine(c(1.0, 0.0), &u0, c(-1.0, 0.0)).unwrap();
        assert!(d.norm() / u0.norm() < 1e-6);
    }

    #[test]
    fn group_law_and_unitarity() {
        let u0 = datum();
        let p = Propagator::new(&u0, 0.5).unwrap();
        let u1 = p.at(0.4).unwrap();
        let u2 = Propagator::new(&u1, 0.5).unwrap().at(0.5).unwrap();
        let u12 = p.at(0.9).unwrap();
        let d = u2.combine(c(1.0, 0.0), &u12, c(-1.0, 0.0)).unwrap();
        assert!(d.norm() / u0.norm() < 1e-6);
        assert!((u12.norm() / u0.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn runaway_support_is_reported() {
        let u0 = datum();
        assert!(matches!(evolve(&u0, 0.0, 6.0), Err(Error::Truncation { .. })));
    }

    #[test]
    fn zero_profile_gives_zero_field() {
        let spec = GridSpec::new(20.0, 4.0);
        let z = c(0.0, 0.0);
        let u = band_limited_datum(WaveIndex::new_2d(0.5).unwrap(), 0.0, |_| (z, z), &spec).unwrap();
        assert_eq!(u.norm(), 0.0);
    }

    #[test]
    fn bump_is_smooth_and_supported() {
        assert_eq!(smooth_bump(0.5, 1.0, 0.5), 0.0);
        assert_eq!(smooth_bump(0.5, 1.0, 1.2), 0.0);
        assert!((smooth_bump(0.5, 1.0, 0.75) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trajectory_sidecars_round_trip() {
        let u0 = datum();
        let traj = evolve_trajectory(&u0, 0.25, &uniform_times(0.0, 0.5, 3)).unwrap();
        let dir = std::env::temp_dir().join(format!("dcoul-traj-{}", std::process::id()));
        let path = traj.write(&dir, "run").unwrap();
        let back = Trajectory::read(&path).unwrap();
        assert_eq!(back, traj);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
