//! Spectral machinery for the massless Dirac–Coulomb operator
//! `D_ν = -i α·∇ - ν/|x|` in two and three space dimensions: distorted
//! Fourier (Hankel) transforms built on the generalized eigenfunctions, the
//! exact propagator, space-time norms, and a Picard solver for the Hartree
//! equation.

pub mod eigen;
pub mod error;
pub mod grid;
pub mod hankel;
pub mod nonlinear;
pub mod norms;
pub mod partialwave;
pub mod propagator;
pub mod quadrature;
pub mod specfun;

pub use eigen::{eval_psi, make_channel, EigenChannel, EigenSample, EnergySign, WaveIndex};
pub use error::{Error, Result};
pub use grid::RadialGrid;
pub use hankel::{GridSpec, SpectralField, TransformPlan, Transformer};
pub use partialwave::{ChannelProfile, PartialWaveField};
