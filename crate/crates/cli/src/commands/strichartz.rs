//! `strichartz scan`: admissibility and ratios on an exponent grid.

use dirac_coulomb::eigen::WaveIndex;
use dirac_coulomb::hankel::GridSpec;
use dirac_coulomb::norms::{admissibility, annulus_exponent_fit, critical_exponents, strichartz_ratio, AnnulusRange, ExponentTable, RadialClass, StrichartzCase, TimeWindow};
use serde_json::json;

use super::data::ring_field;
use super::eigen::k_max_or;
use crate::config::{check_coupling, parse_number, Params};
use crate::error::CliError;
use crate::report::{Case, Cell, Output, Table};

fn class_of(p: &Params) -> Result<RadialClass, CliError> {
    match p.raw("class") {
        "all" => Ok(RadialClass::All),
        "dirac_radial" => Ok(RadialClass::DiracRadial),
        "dirac_nonradial" => Ok(RadialClass::DiracNonradial),
        other => Err(CliError::Config(format!("class = `{other}` must be all, dirac_radial or dirac_nonradial"))),
    }
}

/// `p ∈ {2, 4, 8, ∞}` against `q ∈ {2, 4, 6, 10, 20}` plus `0.95 q_c` (or
/// `40, ∞` when `q_c = ∞`), with the endpoint `(∞, 2)` included.
fn default_pairs(q_c: f64) -> Vec<(f64, f64)> {
    let mut qs = vec![2.0, 4.0, 6.0, 10.0, 20.0];
    if q_c.is_finite() {
        qs.push(0.95 * q_c);
    } else {
        qs.extend([40.0, f64::INFINITY]);
    }
    let mut out = Vec::new();
    for p in [2.0, 4.0, 8.0, f64::INFINITY] {
        for &q in &qs {
            out.push((p, q));
        }
    }
    out
}

fn pairs(p: &Params, q_c: f64) -> Result<Vec<(f64, f64)>, CliError> {
    if p.raw("grid_pq") == "default" {
        return Ok(default_pairs(q_c));
    }
    p.raw("grid_pq")
        .split(',')
        .map(|pair| {
            pair.split_once(':')
                .and_then(|(a, b)| Some((parse_number(a)?, parse_number(b)?)))
                .filter(|(a, b)| *a >= 2.0 && *b >= 2.0)
                .ok_or_else(|| CliError::Config(format!("grid_pq entry `{pair}` must read p:q with p, q in [2, inf]")))
        })
        .collect()
}

pub fn scan(p: &Params, out: &mut Output, dry_run: bool) -> Result<bool, CliError> {
    let n = p.dimension()?;
    let nu = p.f64("nu")?;
    check_coupling(n, nu)?;
    let class = class_of(p)?;
    let (q_c, p_c) = critical_exponents(n, nu, class).map_err(|e| CliError::Config(e.to_string()))?;
    let grid = pairs(p, q_c)?;
    let cases_pq = grid
        .iter()
        .map(|&(pp, q)| admissibility(n, nu, pp, q, class))
        .collect::<dirac_coulomb::Result<Vec<StrichartzCase>>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let k_max = k_max_or(p, n, 1.5, 2.0)?;
    let spec = GridSpec::new(p.positive("r_max")?, p.positive("rho_max")?);
    let (t0, t1) = p.range("t")?;
    let steps = p.usize("steps")?;
    if steps < 2 {
        return Err(CliError::Config("steps must be at least 2".into()));
    }
    let compute = p.bool("compute")?;
    let endpoint_tol = p.positive("endpoint_tol")?;
    let lattice = p.usize("lattice")?.max(2);
    if class == RadialClass::DiracNonradial && k_max < if n == 2 { 1.5 } else { 2.0 } {
        return Err(CliError::Config("the non-radial class needs k_max above the lowest channel".into()));
    }
    if dry_run {
        return Ok(true);
    }

    let window = TimeWindow { t0, t1, count: steps };
    let u0 = compute.then(|| ring_field(n, k_max, &spec, class == RadialClass::DiracNonradial)).transpose()?;
    let mut table = Table::sweep(&["admissible", "ratio_free", "mixed_norm", "sobolev_coulomb", "sobolev_free"]);
    let mut cases = Vec::new();
    for c in &cases_pq {
        let mut row: Vec<Cell> = vec![n.into(), nu.into(), Cell::Empty, c.p.into(), c.q.into(), c.s.into()];
        match (&u0, c.admissible) {
            (Some(u0), true) => {
                let r = strichartz_ratio(u0, nu, c, &window)?;
                row.extend([r.ratio.into(), true.into(), r.ratio_free.into(), r.mixed_norm.into(), r.sobolev_coulomb.into(), r.sobolev_free.into()]);
                let endpoint = c.p.is_infinite() && c.q == 2.0;
                let diagnostics = json!({"s": c.s, "ratio_free": r.ratio_free, "mixed_norm": r.mixed_norm, "sobolev_coulomb": r.sobolev_coulomb});
                cases.push(if endpoint {
                    Case::at_most("endpoint (inf, 2): |ratio - 1|", (r.ratio - 1.0).abs(), endpoint_tol, diagnostics)
                } else {
                    Case {
                        case: format!("ratio ({}, {})", c.p, c.q),
                        value: r.ratio,
                        tolerance: None,
                        pass: r.ratio.is_finite() && r.ratio > 0.0,
                        diagnostics,
                    }
                });
            }
            _ => row.extend([Cell::Empty, c.admissible.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
        }
        table.push(row);
    }
    cases.push(Case {
        case: "critical exponents".into(),
        value: q_c,
        tolerance: None,
        pass: true,
        diagnostics: json!({"q_c": if q_c.is_finite() { json!(q_c) } else { json!("inf") }, "p_c": p_c, "class": class}),
    });

    if out.emit_plot_data {
        let mut rows = Vec::new();
        for i in 0..lattice {
            for j in 0..lattice {
                let (x, y) = (0.5 * i as f64 / (lattice - 1) as f64, 0.5 * j as f64 / (lattice - 1) as f64);
                let (pp, q) = (if x == 0.0 { f64::INFINITY } else { 1.0 / x }, if y == 0.0 { f64::INFINITY } else { 1.0 / y });
                let a = admissibility(n, nu, pp, q, class)?.admissible;
                rows.push(vec![x, y, if a { 1.0 } else { 0.0 }]);
            }
        }
        out.plot("region", &["inv_p", "inv_q", "admissible"], &rows)?;
        annulus_plot(out, n, nu)?;
    }
    out.csv(None, &table)?;
    let pass = out.json(p, &cases, None)?;
    for c in &cases {
        println!("{} {} = {}", if c.pass { "PASS" } else { "FAIL" }, c.case, c.value);
    }
    Ok(pass)
}

/// Log-log series of the annulus fits on the lowest channel, `q ∈ {2, 6}`,
/// with the predicted dyadic exponents.
fn annulus_plot(out: &mut Output, n: u8, nu: f64) -> Result<(), CliError> {
    let ix = WaveIndex::from_parts(n, if n == 2 { 0.5 } else { 1.0 }, None)?;
    let gamma = (ix.k() * ix.k() - nu * nu).sqrt();
    let table = ExponentTable::new(n, 0.75)?;
    let mut rows = Vec::new();
    for (code, range) in [(0.0, AnnulusRange::Small), (1.0, AnnulusRange::Large)] {
        for q in [2.0, 6.0] {
            let fit = annulus_exponent_fit(ix, nu, q, range)?;
            let predicted = match range {
                AnnulusRange::Small => table.small_r(gamma, q),
                AnnulusRange::Large => table.beta(q),
            };
            for (r, v) in fit.radii.iter().zip(&fit.norms) {
                rows.push(vec![code, q, r.ln(), v.ln(), fit.slope, predicted]);
            }
        }
    }
    out.plot("annulus", &["range_large", "q", "ln_r", "ln_norm", "fitted_slope", "predicted_slope"], &rows)
}
