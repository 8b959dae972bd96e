//! `eigen bounds` and `eigen eval`.

use dirac_coulomb::eigen::{bound_campaign, channels_up_to, log_grid, log_log_slope, make_channel, EnergySign, WaveIndex};
use dirac_coulomb::eval_psi;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{check_coupling, Params};
use crate::error::CliError;
use crate::report::{Case, Cell, Output, Table};

/// Small-ρ window of the exponent fit.
const SLOPE_WINDOW: (f64, f64, usize) = (1e-7, 1e-5, 21);

pub(crate) fn k_max_or(p: &Params, n: u8, auto_2d: f64, auto_3d: f64) -> Result<f64, CliError> {
    let k = p.f64_or_auto("k_max")?.unwrap_or(if n == 2 { auto_2d } else { auto_3d });
    let lowest = if n == 2 { 0.5 } else { 1.0 };
    if !(k >= lowest && k <= 40.0) {
        return Err(CliError::Config(format!("k_max = {k} must lie in [{lowest}, 40]")));
    }
    Ok(k)
}

pub fn bounds(p: &Params, out: &mut Output, dry_run: bool) -> Result<bool, CliError> {
    let n = p.dimension()?;
    let nu = p.f64("nu")?;
    check_coupling(n, nu)?;
    let k_max = k_max_or(p, n, 7.5, 5.0)?;
    let (lo, hi) = match p.raw("rho") {
        "auto" => (1e-3, 6.0 * k_max.max(2.0)),
        _ => p.range("rho")?,
    };
    if lo <= 0.0 {
        return Err(CliError::Config("rho range must be positive".into()));
    }
    let per_decade = p.usize("per_decade")?.max(2);
    let slope_tol = p.positive("slope_tol")?;
    let growth_tol = p.positive("growth_tol")?;
    if dry_run {
        return Ok(true);
    }

    let grid = log_grid(lo, hi, per_decade);
    let channels = channels_up_to(n, nu, k_max)?;
    let campaign = bound_campaign(n, nu, &channels, &grid)?;
    let mut cases = Vec::new();
    let mut table = Table::sweep(&["c_small", "c_transition", "c_oscillatory", "d_small", "d_transition", "d_oscillatory", "slope", "expected_slope", "excluded"]);
    let mut samples = Table::new(&["n", "nu", "k", "rho", "regime", "abs_psi", "abs_dpsi"]);
    for (ch, rep) in channels.iter().zip(&campaign.reports) {
        let expected = ch.gamma - (n as f64 - 1.0) / 2.0;
        let (a, b, m) = SLOPE_WINDOW;
        let slope = EnergySign::BOTH
            .iter()
            .map(|s| log_log_slope(ch, *s, a, b, m))
            .collect::<dirac_coulomb::Result<Vec<f64>>>()?
            .into_iter()
            .max_by(|x, y| (x - expected).abs().total_cmp(&(y - expected).abs()))
            .unwrap_or(f64::NAN);
        let rel = (slope - expected).abs() / expected.abs();
        let finite = rep.pass;
        cases.push(Case {
            case: format!("k={} small-rho exponent and finite constants", ch.k()),
            value: rel,
            tolerance: Some(slope_tol),
            pass: finite && rel <= slope_tol,
            diagnostics: json!({
                "slope": slope, "expected": expected, "regime_constants": rep.regime_constants,
                "derivative_constants": rep.derivative_constants, "regime_counts": rep.regime_counts,
                "excluded": rep.excluded, "grid": rep.grid_spec,
            }),
        });
        let mut row: Vec<Cell> = vec![n.into(), nu.into(), ch.k().into(), Cell::Empty, Cell::Empty, Cell::Empty, rep.max_constant().into()];
        row.extend(rep.regime_constants.iter().map(|c| Cell::from(*c)));
        row.extend(rep.derivative_constants.iter().map(|c| Cell::from(*c)));
        row.extend([slope.into(), expected.into(), rep.excluded.into()]);
        table.push(row);

        let rows: Vec<(f64, usize, f64, f64)> = grid
            .par_iter()
            .map(|&rho| {
                let sp = eval_psi(ch, EnergySign::Plus, rho)?;
                let sm = eval_psi(ch, EnergySign::Minus, rho)?;
                let regime = dirac_coulomb::eigen::regime(ch.k().abs(), rho);
                Ok((rho, regime, sp.modulus().max(sm.modulus()), sp.derivative_modulus().max(sm.derivative_modulus())))
            })
            .collect::<dirac_coulomb::Result<_>>()?;
        for (rho, regime, v, d) in rows {
            samples.push(vec![n.into(), nu.into(), ch.k().into(), rho.into(), regime.into(), v.into(), d.into()]);
        }
    }
    let growth = campaign.upper_half_growth();
    cases.push(Case::at_most(
        "constant growth over the upper half of the |k| range",
        growth,
        growth_tol,
        json!({"max_constant": campaign.max_constant(), "decay_constant": campaign.decay_constant, "spread": campaign.upper_half_spread()}),
    ));
    if out.emit_plot_data {
        let ch = &channels[0];
        let (a, b, m) = SLOPE_WINDOW;
        let rows = log_grid(a, b, m - 1)
            .into_iter()
            .map(|rho| Ok(vec![rho.ln(), eval_psi(ch, EnergySign::Plus, rho)?.modulus().ln()]))
            .collect::<dirac_coulomb::Result<Vec<_>>>()?;
        out.plot("slope", &["ln_rho", "ln_abs_psi"], &rows)?;
    }
    out.csv(None, &table)?;
    out.csv(Some("samples"), &samples)?;
    let pass = out.json(p, &cases, None)?;
    for c in &cases {
        println!("{} {} = {}", if c.pass { "PASS" } else { "FAIL" }, c.case, c.value);
    }
    Ok(pass)
}

pub fn eval(p: &Params, out: &mut Output, dry_run: bool) -> Result<bool, CliError> {
    let n = p.dimension()?;
    let nu = p.f64("nu")?;
    check_coupling(n, nu)?;
    let index = WaveIndex::from_parts(n, p.f64("k")?, None).map_err(|e| CliError::Config(e.to_string()))?;
    let channel = make_channel(index, nu).map_err(|e| CliError::Config(e.to_string()))?;
    let sign = match p.raw("sign") {
        "plus" => EnergySign::Plus,
        "minus" => EnergySign::Minus,
        other => return Err(CliError::Config(format!("sign = `{other}` must be plus or minus"))),
    };
    let (lo, hi) = p.range("rho")?;
    if lo <= 0.0 {
        return Err(CliError::Config("rho range must be positive".into()));
    }
    let points = p.usize("points")?;
    if points < 2 {
        return Err(CliError::Config("points must be at least 2".into()));
    }
    if dry_run {
        return Ok(true);
    }
    let rhos: Vec<f64> = (0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect();
    let samples = rhos.par_iter().map(|&r| eval_psi(&channel, sign, r)).collect::<dirac_coulomb::Result<Vec<_>>>()?;
    // F and G are real for real energies; the imaginary columns keep the
    // complex layout of the table.
    let mut table = Table::new(&["rho", "re_f", "im_f", "re_g", "im_g"]);
    for s in &samples {
        table.push(vec![s.rho.into(), s.f.into(), 0.0.into(), s.g.into(), 0.0.into()]);
    }
    let unconfident = samples.iter().filter(|s| !s.confident).count();
    let case = Case {
        case: format!("{index} nu={nu} {sign:?} samples"),
        value: unconfident as f64,
        tolerance: Some(0.0),
        pass: unconfident == 0,
        diagnostics: json!({"points": points, "gamma": channel.gamma, "phase_shift": channel.xi}),
    };
    out.csv(None, &table)?;
    if out.emit_plot_data {
        let rows: Vec<Vec<f64>> = samples.iter().map(|s| vec![s.rho, s.f, s.g]).collect();
        out.plot("psi", &["rho", "f", "g"], &rows)?;
    }
    out.json(p, &[case], None)
}
