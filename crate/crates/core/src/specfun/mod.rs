//! Special functions: complex gamma, Kummer's function and Bessel `J`.

pub mod bessel;
pub mod dd;
pub mod gamma;
pub mod hyp1f1;

pub use bessel::{bessel_crossover, bessel_j};
pub use gamma::{gamma, gamma_real, ln_gamma, ln_gamma_real};
pub use hyp1f1::{hyp1f1, hyp1f1_derivative, Method, SeriesDiagnostics, HYP1F1_CROSSOVER};
