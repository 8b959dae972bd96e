//! `evolve`: unitarity drift and group-law error of the exact flow.

use std::path::Path;

use dirac_coulomb::hankel::GridSpec;
use dirac_coulomb::propagator::{uniform_times, Propagator};
use dirac_coulomb::PartialWaveField;
use num_complex::Complex64;
use serde_json::json;

use super::data::ring_field;
use crate::config::{check_coupling, parse_number, Params};
use crate::error::CliError;
use crate::report::{Case, Cell, Output, Table};

fn rel_diff(a: &PartialWaveField, b: &PartialWaveField) -> dirac_coulomb::Result<f64> {
    Ok(a.combine(Complex64::new(1.0, 0.0), b, Complex64::new(-1.0, 0.0))?.norm() / b.norm())
}

fn compose_pairs(p: &Params) -> Result<Vec<(f64, f64)>, CliError> {
    p.raw("compose")
        .split(',')
        .map(|pair| {
            let parsed = pair.split_once('+').and_then(|(a, b)| Some((parse_number(a)?, parse_number(b)?)));
            parsed.filter(|(a, b)| a.is_finite() && b.is_finite()).ok_or_else(|| CliError::Config(format!("compose entry `{pair}` must read t1+t2")))
        })
        .collect()
}

pub fn run(p: &Params, out: &mut Output, dry_run: bool) -> Result<bool, CliError> {
    let n = p.dimension()?;
    let nu = p.f64("nu")?;
    check_coupling(n, nu)?;
    let k_max = p.positive("k_max")?;
    let spec = GridSpec::new(p.positive("r_max")?, p.positive("rho_max")?);
    let (t0, t1) = p.range("t")?;
    let steps = p.usize("steps")?;
    if steps < 2 {
        return Err(CliError::Config("steps must be at least 2".into()));
    }
    let pairs = compose_pairs(p)?;
    let tol = p.positive("tol")?;
    let trajectory_dir = match p.raw("trajectory") {
        "none" => None,
        d => Some(Path::new(d).to_path_buf()),
    };
    if dry_run {
        return Ok(true);
    }

    let u0 = ring_field(n, k_max, &spec, false)?;
    let prop = Propagator::new(&u0, nu)?;
    let traj = prop.trajectory(&uniform_times(t0, t1, steps))?;
    let m0 = u0.norm();
    let mut table = Table::sweep(&["t", "drift"]);
    let mut drift = 0.0f64;
    for (t, u) in traj.times().iter().zip(traj.states()) {
        let d = (u.norm() / m0 - 1.0).abs();
        drift = drift.max(d);
        table.push(vec![n.into(), nu.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, (u.norm() / m0).into(), (*t).into(), d.into()]);
    }
    let mut cases = vec![Case::at_most("unitarity drift", drift, tol, json!({"steps": steps, "window": [t0, t1], "channels": u0.channels().len()}))];
    for (a, b) in pairs {
        let step = Propagator::new(&prop.at(a)?, nu)?.at(b)?;
        let e = rel_diff(&step, &prop.at(a + b)?)?;
        cases.push(Case::at_most(format!("composition {a}+{b}"), e, tol, json!({})));
    }
    if let Some(dir) = trajectory_dir {
        traj.write(&dir, &out.stem)?;
    }
    if out.emit_plot_data {
        let rows: Vec<Vec<f64>> = traj.times().iter().zip(traj.states()).map(|(t, u)| vec![*t, u.norm() / m0 - 1.0]).collect();
        out.plot("drift", &["t", "norm_ratio_minus_one"], &rows)?;
    }
    out.csv(None, &table)?;
    let pass = out.json(p, &cases, None)?;
    for c in &cases {
        println!("{} {} = {}", if c.pass { "PASS" } else { "FAIL" }, c.case, c.value);
    }
    Ok(pass)
}
