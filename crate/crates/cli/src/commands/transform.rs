//! `transform`: isometry, inversion and diagonalization residuals per channel.

use dirac_coulomb::eigen::WaveIndex;
use dirac_coulomb::hankel::{GridSpec, TransformPlan};
use dirac_coulomb::{ChannelProfile, RadialGrid};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::eigen::k_max_or;
use crate::config::{check_coupling, Params};
use crate::error::CliError;
use crate::report::{Case, Cell, Output, Table};

/// Twisted Gaussian ring: `(e^{iar} env, (0.3 − 0.2ir) env)`.
pub(crate) fn ring(grid: &RadialGrid, center: f64, width: f64, twist: f64) -> ChannelProfile {
    let env = |r: f64| (-(r - center).powi(2) / (2.0 * width * width)).exp();
    ChannelProfile {
        plus: grid.nodes().iter().map(|&r| Complex64::from_polar(env(r), twist * r)).collect(),
        minus: grid.nodes().iter().map(|&r| env(r) * Complex64::new(0.3, -0.2 * r)).collect(),
    }
}

fn diff(a: &ChannelProfile, b: &ChannelProfile) -> ChannelProfile {
    ChannelProfile {
        plus: a.plus.iter().zip(&b.plus).map(|(x, y)| x - y).collect(),
        minus: a.minus.iter().zip(&b.minus).map(|(x, y)| x - y).collect(),
    }
}

struct Residuals {
    index: WaveIndex,
    isometry: f64,
    inversion: f64,
    diagonalization: f64,
    refined: f64,
}

fn residuals(index: WaveIndex, nu: f64, spec: &GridSpec, refine: f64, center: f64, width: f64) -> dirac_coulomb::Result<Residuals> {
    let plan = TransformPlan::from_spec(index, nu, spec)?;
    let f = ring(plan.r_grid(), center, width, 0.5);
    let g = plan.forward(&f)?;
    let isometry = (plan.rho_norm(&g) / plan.r_norm(&f) - 1.0).abs();
    let inversion = plan.r_norm(&diff(&plan.inverse(&g)?, &f)) / plan.r_norm(&f);
    let diagonalization = plan.diagonalization_residual(&f)?;
    let fine = TransformPlan::from_spec(index, nu, &spec.refined(refine))?;
    let refined = fine.diagonalization_residual(&ring(fine.r_grid(), center, width, 0.5))?;
    Ok(Residuals { index, isometry, inversion, diagonalization, refined })
}

pub fn run(p: &Params, out: &mut Output, dry_run: bool) -> Result<bool, CliError> {
    let n = p.dimension()?;
    let nu = p.f64("nu")?;
    check_coupling(n, nu)?;
    let k_max = k_max_or(p, n, 4.5, 5.0)?;
    let spec = GridSpec::new(p.positive("r_max")?, p.positive("rho_max")?);
    let (center, width) = (p.positive("center")?, p.positive("width")?);
    let tol = p.positive("tol")?;
    let refine = p.positive("refine")?;
    let min_reduction = p.positive("min_reduction")?;
    if refine <= 1.0 {
        return Err(CliError::Config("refine must exceed 1".into()));
    }
    if dry_run {
        return Ok(true);
    }
    let indices: Vec<WaveIndex> = dirac_coulomb::eigen::channels_up_to(n, nu, k_max)?.into_iter().map(|c| c.index).collect();
    let results = indices
        .par_iter()
        .map(|ix| residuals(*ix, nu, &spec, refine, center, width))
        .collect::<dirac_coulomb::Result<Vec<_>>>()?;

    let mut table = Table::sweep(&["tag", "tolerance", "pass"]);
    let mut cases = Vec::new();
    for r in &results {
        let k = r.index.k();
        let reduction = r.diagonalization / r.refined;
        let rows = [
            ("isometry", r.isometry, r.isometry <= tol, json!({})),
            ("inversion", r.inversion, r.inversion <= tol, json!({})),
            (
                "diagonalization",
                r.diagonalization,
                r.diagonalization <= tol && reduction >= min_reduction,
                json!({"refined": r.refined, "reduction": reduction, "min_reduction": min_reduction, "refine": refine}),
            ),
        ];
        for (tag, value, pass, diag) in rows {
            table.push(vec![n.into(), nu.into(), k.into(), Cell::Empty, Cell::Empty, Cell::Empty, value.into(), tag.into(), tol.into(), pass.into()]);
            cases.push(Case { case: format!("{tag} k={k}"), value, tolerance: Some(tol), pass, diagnostics: diag });
        }
    }
    if out.emit_plot_data {
        let rows: Vec<Vec<f64>> = results.iter().map(|r| vec![r.index.k(), r.isometry, r.inversion, r.diagonalization, r.refined]).collect();
        out.plot("residuals", &["k", "isometry", "inversion", "diagonalization", "diagonalization_refined"], &rows)?;
    }
    out.csv(None, &table)?;
    let pass = out.json(p, &cases, None)?;
    for c in cases.iter().filter(|c| !c.pass) {
        println!("FAIL {} = {}", c.case, c.value);
    }
    Ok(pass)
}
