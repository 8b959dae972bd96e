//! `hartree solve`: Picard iteration with a run record.
//!
//! Kernels are given as `yukawa:b=1,c=1`, `bracket:alpha=2` or
//! `table:<path>`, the file holding `{"radii": [...], "values": [...],
//! "norms": [[p, ‖ω‖_p], ...]}` with `radii[0] = 0`.

use std::collections::BTreeMap;
use std::path::Path;

use dirac_coulomb::eigen::WaveIndex;
use dirac_coulomb::hankel::GridSpec;
use dirac_coulomb::nonlinear::{coupling_limit, picard_solve, wellposedness_certificate, ConvolutionKernel, PicardConfig};
use dirac_coulomb::propagator::ring_datum;
use dirac_coulomb::{ChannelProfile, PartialWaveField};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;

use crate::config::{parse_number, Params};
use crate::error::CliError;
use crate::report::{Case, Cell, Output, Table};

#[derive(Deserialize)]
struct KernelTable {
    radii: Vec<f64>,
    values: Vec<f64>,
    norms: Vec<(f64, f64)>,
}

/// Parses a kernel specification.
pub fn parse_kernel(spec: &str) -> Result<ConvolutionKernel, CliError> {
    let bad = |why: &str| CliError::Config(format!("omega = `{spec}`: {why}"));
    let (kind, rest) = spec.split_once(':').ok_or_else(|| bad("expected kind:parameters"))?;
    if kind == "table" {
        let text = std::fs::read_to_string(Path::new(rest)).map_err(|e| bad(&e.to_string()))?;
        let t: KernelTable = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
        return ConvolutionKernel::tabulated(t.radii, t.values, t.norms).map_err(|e| bad(&e.to_string()));
    }
    let mut args = BTreeMap::new();
    for kv in rest.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad("parameters must read name=value"))?;
        let v = parse_number(v).filter(|v| v.is_finite()).ok_or_else(|| bad("parameter values must be finite numbers"))?;
        if args.insert(k.trim().to_string(), v).is_some() {
            return Err(bad("duplicate parameter"));
        }
    }
    let mut take = |name: &str| args.remove(name).ok_or_else(|| bad(&format!("missing parameter {name}")));
    let kernel = match kind {
        "yukawa" => ConvolutionKernel::yukawa(take("b")?, take("c")?),
        "bracket" => ConvolutionKernel::bracket(take("alpha")?),
        _ => return Err(bad("kind must be yukawa, bracket or table")),
    };
    if let Some(extra) = args.keys().next() {
        return Err(bad(&format!("unknown parameter {extra}")));
    }
    kernel.map_err(|e| bad(&e.to_string()))
}

/// Dirac-radial rings on `k = −1` (`m = ±½`, amplitudes 1 and 0.6, centre 4,
/// width 1) scaled to `‖u‖ = norm`, plus an identically zero `k = 2` channel.
pub fn builtin_datum(norm: f64) -> dirac_coulomb::Result<PartialWaveField> {
    let spec = GridSpec::new(12.0, 6.0);
    let (r, _) = spec.grids()?;
    let mut u = PartialWaveField::new(3, r.clone())?;
    for (m, a) in [(0.5, 1.0), (-0.5, 0.6)] {
        let ix = WaveIndex::new_3d(-1, Some(m))?;
        let ring = ring_datum(ix, &spec, 4.0, 1.0, Complex64::new(a, 0.0), Complex64::new(0.0, 0.4 * a))?;
        u.insert(ix, ring.channel(&ix).expect("ring carries its channel").clone())?;
    }
    u.insert(WaveIndex::new_3d(2, Some(0.5))?, ChannelProfile::zeros(r.len()))?;
    Ok(u.scale(Complex64::new(norm / u.norm(), 0.0)))
}

fn nonradial_channels_vanish(u: &PartialWaveField) -> bool {
    u.channels().iter().filter(|(ix, _)| !ix.is_dirac_radial()).all(|(_, p)| p.is_zero())
}

pub fn solve(p: &Params, out: &mut Output, dry_run: bool) -> Result<bool, CliError> {
    let omega = parse_kernel(p.raw("omega"))?;
    let p_omega = p.f64("p")?;
    if !(p_omega >= 1.0) {
        return Err(CliError::Config(format!("p = {p_omega} must be at least 1")));
    }
    let omega_norm = omega.lp_norm(p_omega).map_err(|e| CliError::Config(e.to_string()))?;
    let t_final = p.f64_or_auto("t_final")?;
    if t_final.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
        return Err(CliError::Config("T must be positive or auto".into()));
    }
    let nu = p.f64("nu")?;
    if !(nu.abs() < coupling_limit()) {
        return Err(CliError::Config(format!("coupling nu = {nu} out of range: the solver requires |ν| < √3/2")));
    }
    let datum_ref = p.raw("datum").to_string();
    let norm = p.positive("norm")?;
    let config = PicardConfig {
        t_final,
        intervals: p.usize("intervals")?,
        tol: p.positive("tol")?,
        max_iters: p.usize("max_iters")?,
        p_omega,
    };
    if config.intervals < 1 || config.max_iters < 1 {
        return Err(CliError::Config("intervals and max_iters must be positive".into()));
    }
    let drift_tol = p.positive("drift_tol")?;
    let certificate = p.bool("certificate")?;
    let u0 = if datum_ref == "builtin" {
        builtin_datum(norm)?
    } else {
        let text = std::fs::read_to_string(&datum_ref).map_err(|e| CliError::Config(format!("datum {datum_ref}: {e}")))?;
        PartialWaveField::from_json(&text).map_err(|e| CliError::Config(format!("datum {datum_ref}: {e}")))?
    };
    if u0.n() != 3 || !u0.is_dirac_radial() {
        return Err(CliError::Config("the datum must be a Dirac-radial 3D field".into()));
    }
    if dry_run {
        return Ok(true);
    }

    let state = picard_solve(&u0, nu, &omega, &config)?;
    let drift = state.mass_drift();
    let radial = state.iterates.iter().all(|tr| tr.states().iter().all(nonradial_channels_vanish));
    let late = &state.contraction_factors[1.min(state.contraction_factors.len())..];
    let geometric = late.iter().all(|f| *f < 1.0);
    let mut cases = vec![
        Case {
            case: "converged".into(),
            value: state.distances.last().copied().unwrap_or(0.0),
            tolerance: Some(config.tol),
            pass: state.converged,
            diagnostics: json!({"iterations": state.distances.len()}),
        },
        Case {
            case: "contraction factors below 1 after the first step".into(),
            value: late.iter().copied().fold(0.0, f64::max),
            tolerance: Some(1.0),
            pass: geometric,
            diagnostics: json!({"factors": state.contraction_factors}),
        },
        Case::at_most("mass drift", drift, drift_tol, json!({})),
        Case {
            case: "Dirac-radial channels preserved".into(),
            value: if radial { 0.0 } else { 1.0 },
            tolerance: Some(0.0),
            pass: radial,
            diagnostics: json!({}),
        },
    ];
    let cert = if certificate && state.converged { Some(wellposedness_certificate(&state, p_omega)?) } else { None };
    if let Some(c) = &cert {
        cases.push(Case {
            case: "well-posedness norms finite".into(),
            value: c.sup_l2,
            tolerance: None,
            pass: c.finite,
            diagnostics: serde_json::to_value(c).unwrap_or_default(),
        });
    }
    let record = json!({
        "u0_ref": if datum_ref == "builtin" { format!("builtin(norm={norm})") } else { datum_ref.clone() },
        "u0_norm": u0.norm(),
        "nu": nu,
        "omega": p.raw("omega"),
        "omega_norm": omega_norm,
        "p": p_omega,
        "s": state.s,
        "T": state.t_final,
        "T_auto": t_final.is_none(),
        "M": state.ball_radius,
        "tol": config.tol,
        "factors": state.contraction_factors,
        "distances": state.distances,
        "norms": state.iterate_norms,
        "converged": state.converged,
    });
    let mut table = Table::sweep(&["iterate", "factor", "iterate_norm"]);
    for (i, d) in state.distances.iter().enumerate() {
        table.push(vec![
            3u8.into(),
            nu.into(),
            Cell::Empty,
            p_omega.into(),
            Cell::Empty,
            state.s.into(),
            (*d).into(),
            (i + 1).into(),
            state.contraction_factors.get(i).copied().into(),
            state.iterate_norms.get(i + 1).copied().into(),
        ]);
    }
    if out.emit_plot_data {
        let rows: Vec<Vec<f64>> = state.contraction_factors.iter().enumerate().map(|(i, f)| vec![(i + 1) as f64, *f]).collect();
        out.plot("factors", &["iterate", "factor"], &rows)?;
    }
    out.csv(None, &table)?;
    let pass = out.json(p, &cases, Some(&record))?;
    for c in &cases {
        println!("{} {} = {}", if c.pass { "PASS" } else { "FAIL" }, c.case, c.value);
    }
    Ok(pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_specs() {
        assert!(parse_kernel("yukawa:b=1,c=1").is_ok());
        assert!(parse_kernel("bracket:alpha=2").is_ok());
        assert!(parse_kernel("yukawa:b=1").is_err());
        assert!(parse_kernel("yukawa:b=1,c=1,d=2").is_err());
        assert!(parse_kernel("gauss:a=1").is_err());
        assert!(parse_kernel("table:/nonexistent/file.json").is_err());
    }

    #[test]
    fn builtin_datum_is_dirac_radial() {
        let u = builtin_datum(0.5).unwrap();
        assert!(u.is_dirac_radial());
        assert!((u.norm() - 0.5).abs() < 1e-12);
    }
}
