//! Test data shared by the campaigns.

use dirac_coulomb::hankel::GridSpec;
use dirac_coulomb::partialwave::channel_indices;
use dirac_coulomb::propagator::ring_datum;
use dirac_coulomb::{PartialWaveField, Result};
use num_complex::Complex64;

/// Gaussian rings (centre `3 + 0.07 i`, width 0.4) on every channel up to
/// `k_max`, optionally skipping the Dirac-radial ones.
pub fn ring_field(n: u8, k_max: f64, spec: &GridSpec, nonradial_only: bool) -> Result<PartialWaveField> {
    let (r, _) = spec.grids()?;
    let mut f = PartialWaveField::new(n, r)?;
    for (i, ix) in channel_indices(n, k_max)?.into_iter().enumerate() {
        if nonradial_only && ix.is_dirac_radial() {
            continue;
        }
        let ring = ring_datum(ix, spec, 3.0 + 0.07 * i as f64, 0.4, Complex64::new(1.0, 0.1 * i as f64), Complex64::new(0.2, -0.3))?;
        f.insert(ix, ring.channel(&ix).expect("ring carries its channel").clone())?;
    }
    Ok(f)
}
