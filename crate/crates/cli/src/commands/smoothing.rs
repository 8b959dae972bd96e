//! `smoothing morrey`: the Morrey functional over dyadic radii.

use dirac_coulomb::eigen::WaveIndex;
use dirac_coulomb::hankel::GridSpec;
use dirac_coulomb::norms::{morrey_exact, morrey_functional, MorreyProfile};
use dirac_coulomb::propagator::{band_limited_datum, smooth_bump, uniform_times, Propagator};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{check_coupling, Params};
use crate::error::CliError;
use crate::report::{Case, Cell, Output, Table};

/// `lo, 2 lo, 4 lo, …` up to `hi` (inclusive up to rounding).
fn dyadic(lo: f64, hi: f64) -> Vec<f64> {
    let count = ((hi / lo).log2() + 1e-9).floor() as i32;
    (0..=count).map(|j| lo * 2f64.powi(j)).collect()
}

pub fn morrey(p: &Params, out: &mut Output, dry_run: bool) -> Result<bool, CliError> {
    let n = p.dimension()?;
    let nu = p.f64("nu")?;
    check_coupling(n, nu)?;
    let k = p.f64_or_auto("k")?.unwrap_or(if n == 2 { 0.5 } else { 1.0 });
    let m = (n == 3).then(|| p.f64("m")).transpose()?;
    let index = WaveIndex::from_parts(n, k, m).map_err(|e| CliError::Config(e.to_string()))?;
    let (b0, b1) = p.range("band")?;
    if b0 <= 0.0 {
        return Err(CliError::Config("band must be positive".into()));
    }
    let spec = GridSpec::new(p.positive("r_max")?, p.positive("rho_max")?);
    if b1 >= spec.rho_max {
        return Err(CliError::Config(format!("band upper end {b1} must lie below rho_max {}", spec.rho_max)));
    }
    let (r0, r1) = p.range("radii")?;
    if r0 <= 0.0 {
        return Err(CliError::Config("radii must be positive".into()));
    }
    let radii = dyadic(r0, r1);
    let exact = match p.raw("route") {
        "exact" => true,
        "windowed" => false,
        other => return Err(CliError::Config(format!("route = `{other}` must be exact or windowed"))),
    };
    let (t0, t1) = p.range("t")?;
    let steps = p.usize("steps")?;
    if steps < 2 {
        return Err(CliError::Config("steps must be at least 2".into()));
    }
    let ratio_tol = p.positive("ratio_tol")?;
    if dry_run {
        return Ok(true);
    }

    let zero = Complex64::new(0.0, 0.0);
    let u0 = band_limited_datum(index, nu, |x| (Complex64::new(smooth_bump(b0, b1, x), 0.0), zero), &spec)?;
    let profile: MorreyProfile = if exact {
        morrey_exact(&u0, nu, &radii)?
    } else {
        let traj = Propagator::new(&u0, nu)?.trajectory(&uniform_times(t0, t1, steps))?;
        morrey_functional(&traj, &radii)?
    };
    let mut table = Table::sweep(&["R"]);
    for (r, v) in profile.radii.iter().zip(&profile.values) {
        table.push(vec![n.into(), nu.into(), k.into(), Cell::Empty, Cell::Empty, Cell::Empty, (*v).into(), (*r).into()]);
    }
    table.push(vec![n.into(), nu.into(), k.into(), Cell::Empty, Cell::Empty, Cell::Empty, profile.supremum.into(), "sup".into()]);
    let ratio = profile.max_over_median();
    let cases = vec![Case::at_most(
        "max/median of the per-radius values",
        ratio,
        ratio_tol,
        json!({
            "supremum": profile.supremum, "argmax_radius": profile.radii[profile.argmax],
            "interior_supremum": profile.interior_supremum(), "route": p.raw("route"), "datum_norm": u0.norm(),
        }),
    )];
    if out.emit_plot_data {
        let rows: Vec<Vec<f64>> = profile.radii.iter().zip(&profile.values).map(|(r, v)| vec![*r, *v]).collect();
        out.plot("profile", &["R", "value"], &rows)?;
    }
    out.csv(None, &table)?;
    let pass = out.json(p, &cases, None)?;
    println!("{} max/median = {ratio}, supremum = {}", if pass { "PASS" } else { "FAIL" }, profile.supremum);
    Ok(pass)
}

#[cfg(test)]
mod tests {
    #[test]
    fn dyadic_radii_include_both_ends() {
        let r = super::dyadic(2f64.powi(-6), 2f64.powi(6));
        assert_eq!(r.len(), 13);
        assert_eq!(r[12], 64.0);
    }
}
