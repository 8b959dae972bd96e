//! Shared fixtures for the benchmarks.

use dirac_coulomb::hankel::GridSpec;
use dirac_coulomb::partialwave::channel_indices;
use dirac_coulomb::propagator::ring_datum;
use dirac_coulomb::PartialWaveField;
use num_complex::Complex64;

/// Grid of the propagation fixtures.
pub fn spec() -> GridSpec {
    GridSpec::new(10.0, 16.0)
}

/// Gaussian rings on every channel with `|k| <= k_max`.
pub fn ring_field(n: u8, k_max: f64) -> PartialWaveField {
    let spec = spec();
    let (r, _) = spec.grids().unwrap();
    let mut f = PartialWaveField::new(n, r).unwrap();
    for (i, ix) in channel_indices(n, k_max).unwrap().into_iter().enumerate() {
        let ring = ring_datum(ix, &spec, 3.0 + 0.07 * i as f64, 0.4, Complex64::new(1.0, 0.1 * i as f64), Complex64::new(0.2, -0.3)).unwrap();
        f.insert(ix, ring.channel(&ix).unwrap().clone()).unwrap();
    }
    f
}
