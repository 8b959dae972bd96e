//! `dcoul`: campaign driver for the Dirac–Coulomb spectral library.
//!
//! Exit codes: 0 pass, 1 acceptance failure or computation error, 2 config
//! error. `DCOUL_THREADS` sets the worker count (default: available
//! parallelism).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod report;

use commands::*;
use config::{Params, Schema, Sections};
use error::CliError;
use report::Output;

/// Environment variable holding the worker count.
const THREADS_ENV: &str = "DCOUL_THREADS";

#[derive(Parser, Debug)]
#[command(name = "dcoul", version, about = "Dirac–Coulomb spectral campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every command.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Sectioned key = value file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "dcoul-out")]
    out: PathBuf,
    /// Validate the configuration and exit without computing.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Also write (x, y) series files for figures.
    #[arg(long, global = true)]
    emit_plot_data: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generalized eigenfunctions.
    #[command(subcommand)]
    Eigen(EigenCommand),
    /// Isometry, inversion and diagonalization residuals of the transform.
    Transform(TransformArgs),
    /// Unitarity and group law of the exact flow.
    Evolve(EvolveArgs),
    /// Strichartz ratios over exponent pairs.
    #[command(subcommand)]
    Strichartz(StrichartzCommand),
    /// Local smoothing.
    #[command(subcommand)]
    Smoothing(SmoothingCommand),
    /// Hartree equation.
    #[command(subcommand)]
    Hartree(HartreeCommand),
}

#[derive(Subcommand, Debug)]
enum EigenCommand {
    /// Pointwise bound constants over a channel range.
    Bounds(EigenBoundsArgs),
    /// Tabulate one eigenfunction.
    Eval(EigenEvalArgs),
}

#[derive(Subcommand, Debug)]
enum StrichartzCommand {
    /// Admissibility and ratios on an exponent grid.
    Scan(StrichartzScanArgs),
}

#[derive(Subcommand, Debug)]
enum SmoothingCommand {
    /// The Morrey functional over dyadic radii.
    Morrey(SmoothingMorreyArgs),
}

#[derive(Subcommand, Debug)]
enum HartreeCommand {
    /// Picard iteration of the Duhamel map.
    Solve(HartreeSolveArgs),
}

/// Every command schema, for validating configuration files.
pub fn all_schemas() -> Vec<&'static Schema> {
    vec![
        &EigenBoundsArgs::SCHEMA,
        &EigenEvalArgs::SCHEMA,
        &TransformArgs::SCHEMA,
        &EvolveArgs::SCHEMA,
        &StrichartzScanArgs::SCHEMA,
        &SmoothingMorreyArgs::SCHEMA,
        &HartreeSolveArgs::SCHEMA,
    ]
}

type Runner = fn(&Params, &mut Output, bool) -> Result<bool, CliError>;

fn dispatch(command: Command) -> (Common, &'static Schema, Vec<(&'static str, Option<String>)>, Runner) {
    match command {
        Command::Eigen(EigenCommand::Bounds(a)) => (a.common.clone(), &EigenBoundsArgs::SCHEMA, a.flags(), eigen::bounds),
        Command::Eigen(EigenCommand::Eval(a)) => (a.common.clone(), &EigenEvalArgs::SCHEMA, a.flags(), eigen::eval),
        Command::Transform(a) => (a.common.clone(), &TransformArgs::SCHEMA, a.flags(), transform::run),
        Command::Evolve(a) => (a.common.clone(), &EvolveArgs::SCHEMA, a.flags(), evolve::run),
        Command::Strichartz(StrichartzCommand::Scan(a)) => (a.common.clone(), &StrichartzScanArgs::SCHEMA, a.flags(), strichartz::scan),
        Command::Smoothing(SmoothingCommand::Morrey(a)) => (a.common.clone(), &SmoothingMorreyArgs::SCHEMA, a.flags(), smoothing::morrey),
        Command::Hartree(HartreeCommand::Solve(a)) => (a.common.clone(), &HartreeSolveArgs::SCHEMA, a.flags(), hartree::solve),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| CliError::Config(format!("{THREADS_ENV} = `{v}` must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(format!("{THREADS_ENV}: {e}")))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let (common, schema, flags, runner) = dispatch(cli.command);
    let file: Option<Sections> = common.config.as_deref().map(|p| config::parse_file(p, &all_schemas())).transpose()?;
    let params = Params::resolve(schema, file.as_ref(), &flags)?;
    let stem = schema.section.replace('.', "_");
    let mut out = Output::new(&common.out, &stem, common.emit_plot_data);
    let pass = runner(&params, &mut out, common.dry_run)?;
    if common.dry_run {
        println!("config ok: [{}] hash {}", params.section, report::config_hash(&params));
    } else {
        for path in out.written() {
            println!("wrote {}", path.display());
        }
        println!("{}", if pass { "PASS" } else { "FAIL" });
    }
    Ok(pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dcoul: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
