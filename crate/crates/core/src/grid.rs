//! Radial grids. Transforms and finite differences work on grids that are
//! uniform in `u = ln r`; the quadrature weights carry the `dr` measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gregory_weights;

/// Nodes and `dr`-weights of a radial quadrature.
///
/// `log_step` is `Some(h)` when `nodes[j] = nodes[0] e^{jh}`, which transforms
/// and the radial Dirac operator require.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_step: Option<f64>,
}

/// Grids are equal when their nodes and weights are; the log step is derived.
impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.weights == other.weights
    }
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Serialize for RadialGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridRepr { nodes: self.nodes.clone(), weights: self.weights.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RadialGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GridRepr::deserialize(d)?;
        RadialGrid::from_parts(r.nodes, r.weights).map_err(serde::de::Error::custom)
    }
}

impl RadialGrid {
    /// Log-uniform grid from `r_min` to `r_max` with step at most `h` in `ln r`.
    pub fn log_uniform(r_min: f64, r_max: f64, h: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && h > 0.0) {
            return Err(Error::Grid(format!(
                "need 0 < r_min < r_max and h > 0 (got {r_min}, {r_max}, {h})"
            )));
        }
        let span = (r_max / r_min).ln();
        let intervals = (span / h).ceil().max(1.0) as usize;
        Ok(Self::log_uniform_count(r_min, span / intervals as f64, intervals + 1))
    }

    /// Log-uniform grid `r_j = r_min e^{jh}`, `j < count`.
    pub fn log_uniform_count(r_min: f64, h: f64, count: usize) -> Self {
        let nodes: Vec<f64> = (0..count).map(|j| r_min * (j as f64 * h).exp()).collect();
        let c = gregory_weights(count);
        let weights = nodes.iter().zip(&c).map(|(r, c)| h * c * r).collect();
        RadialGrid { nodes, weights, log_step: Some(h) }
    }

    /// Grid from explicit nodes and weights (validated; log structure detected).
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.len() < 2 {
            return Err(Error::Grid("nodes and weights must have equal length >= 2".into()));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Grid("nodes must be positive and strictly increasing".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Grid("weights must be positive".into()));
        }
        let h = (nodes[1] / nodes[0]).ln();
        let uniform = nodes
            .windows(2)
            .all(|p| ((p[1] / p[0]).ln() - h).abs() <= 1e-10 * h.max(1.0));
        Ok(RadialGrid { nodes, weights, log_step: uniform.then_some(h) })
    }

    /// The grid scaled by `λ > 0`: nodes and `dr`-weights times `λ`, same log step.
    pub fn dilated(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Grid(format!("dilation factor must be positive (got {lambda})")));
        }
        Ok(RadialGrid {
            nodes: self.nodes.iter().map(|r| r * lambda).collect(),
            weights: self.weights.iter().map(|w| w * lambda).collect(),
            log_step: self.log_step,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn log_step(&self) -> Option<f64> {
        self.log_step
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Weights for the measure `r^{n-1} dr`.
    pub fn measure(&self, n: u8) -> Vec<f64> {
        let p = n as i32 - 1;
        self.nodes.iter().zip(&self.weights).map(|(r, w)| w * r.powi(p)).collect()
    }

    /// `∫ f r^{n-1} dr`.
    pub fn integrate(&self, n: u8, f: &[f64]) -> f64 {
        self.measure(n).iter().zip(f).map(|(w, f)| w * f).sum()
    }

    /// Requires the log-uniform structure and returns its step.
    pub fn require_log_step(&self) -> Result<f64> {
        self.log_step
            .ok_or_else(|| Error::Grid("operation requires a log-uniform grid".into()))
    }

    /// `∫_0^R F r^{n-1} dr` for the sampled density `F`, with linear
    /// interpolation in `ln r` inside the cell containing `R`.
    pub fn integrate_to(&self, n: u8, f: &[f64], radius: f64) -> f64 {
        if radius >= self.r_max() {
            return self.integrate(n, f);
        }
        if radius <= self.r_min() {
            return 0.0;
        }
        // Trapezoid in u on the cells below R; the integrand is F r^n.
        let p = n as i32;
        let g: Vec<f64> = self.nodes.iter().zip(f).map(|(r, f)| f * r.powi(p)).collect();
        let mut acc = 0.0;
        let mut j = 0;
        while j + 1 < self.nodes.len() && self.nodes[j + 1] <= radius {
            let du = (self.nodes[j + 1] / self.nodes[j]).ln();
            acc += 0.5 * du * (g[j] + g[j + 1]);
            j += 1;
        }
        if j + 1 < self.nodes.len() {
            let du = (self.nodes[j + 1] / self.nodes[j]).ln();
            let t = (radius / self.nodes[j]).ln() / du;
            let gr = g[j] + t * (g[j + 1] - g[j]);
            acc += 0.5 * t * du * (g[j] + gr);
        }
        acc
    }
}
