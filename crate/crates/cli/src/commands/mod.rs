//! Command schemas, flag structs and runners.
//!
//! Each command's keys are declared once; the macro derives the config
//! schema and the matching `--kebab-case` flags from the same list.

mod data;
pub mod eigen;
pub mod evolve;
pub mod hartree;
pub mod smoothing;
pub mod strichartz;
pub mod transform;

use crate::config::Schema;
use crate::Common;

macro_rules! command_args {
    ($(#[$meta:meta])* $name:ident, $section:literal, [$($key:ident = $default:literal $(as $alias:literal)? : $doc:literal),* $(,)?]) => {
        $(#[$meta])*
        #[derive(clap::Args, Debug)]
        pub struct $name {
            #[command(flatten)]
            pub common: Common,
            $(
                #[doc = concat!($doc, " [default: ", $default, "]")]
                #[arg(long $(, visible_alias = $alias)?)]
                pub $key: Option<String>,
            )*
        }

        impl $name {
            pub const SCHEMA: Schema = Schema { section: $section, keys: &[$((stringify!($key), $default)),*] };

            pub fn flags(&self) -> Vec<(&'static str, Option<String>)> {
                vec![$((stringify!($key), self.$key.clone())),*]
            }
        }
    };
}

command_args!(EigenBoundsArgs, "eigen.bounds", [
    n = "3": "Dimension, 2 or 3",
    nu = "0.5": "Coulomb coupling",
    k_max = "auto": "Largest |k| (auto: 15/2 in 2D, 5 in 3D)",
    rho = "auto": "Range lo..hi of ρ (auto: 1e-3..6·max(k_max, 2))",
    per_decade = "40": "Log-spaced ρ samples per decade",
    slope_tol = "0.01": "Relative tolerance of the small-ρ exponent",
    growth_tol = "0.10": "Allowed growth of the constants over the upper half of the |k| range",
]);

command_args!(EigenEvalArgs, "eigen.eval", [
    n = "2": "Dimension, 2 or 3",
    k = "0.5": "Channel index k",
    nu = "0": "Coulomb coupling",
    sign = "plus": "Energy sign, plus or minus",
    rho = "1e-3..100": "Range lo..hi of ρ",
    points = "201": "Number of log-spaced samples",
]);

command_args!(TransformArgs, "transform", [
    n = "3": "Dimension, 2 or 3",
    nu = "0.25": "Coulomb coupling",
    k_max = "auto": "Largest |k| (auto: 9/2 in 2D, 5 in 3D)",
    r_max = "6.5": "Outer radius of the r grid",
    rho_max = "17": "Outer radius of the ρ grid",
    center = "3": "Centre of the Gaussian ring test profile",
    width = "0.4": "Width of the ring",
    tol = "1e-3": "Residual tolerance",
    refine = "2": "Grid refinement factor of the convergence check",
    min_reduction = "4": "Required residual reduction under refinement",
]);

command_args!(EvolveArgs, "evolve", [
    n = "3": "Dimension, 2 or 3",
    nu = "0.5": "Coulomb coupling",
    k_max = "2": "Largest |k| of the multi-channel ring datum",
    r_max = "10": "Outer radius of the r grid",
    rho_max = "16": "Outer radius of the ρ grid",
    t = "0..1": "Time window",
    steps = "65": "Uniform time nodes",
    compose = "0.25+0.75,0.5+0.5,0.125+0.3": "Group-law checks t1+t2",
    tol = "1e-3": "Tolerance of drift and composition errors",
    trajectory = "none": "Directory for trajectory sidecar files, or none",
]);

command_args!(StrichartzScanArgs, "strichartz.scan", [
    n = "3": "Dimension, 2 or 3",
    nu = "0.5": "Coulomb coupling",
    class = "all": "Data class: all, dirac_radial or dirac_nonradial",
    grid_pq = "default": "Exponent pairs p:q separated by commas, or default",
    k_max = "auto": "Largest |k| of the ring datum (auto: 3/2 in 2D, 2 in 3D)",
    r_max = "10": "Outer radius of the r grid",
    rho_max = "16": "Outer radius of the ρ grid",
    t = "0..1": "Time window",
    steps = "65": "Uniform time nodes",
    compute = "true": "Evaluate ratios for admissible pairs",
    endpoint_tol = "1e-3": "Tolerance of the (∞, 2) ratio against 1",
    lattice = "50": "Side of the (1/p, 1/q) lattice in the plot data",
]);

command_args!(SmoothingMorreyArgs, "smoothing.morrey", [
    n = "3": "Dimension, 2 or 3",
    nu = "0.5": "Coulomb coupling",
    k = "auto": "Channel index (auto: 1 in 3D, 1/2 in 2D)",
    m = "0.5": "Magnetic index m_k (3D only)",
    band = "16..32": "Energy band of the smooth-bump datum",
    r_max = "16.8": "Outer radius of the r grid",
    rho_max = "41.6": "Outer radius of the ρ grid",
    radii = "2^-6..2^6" as "R": "Dyadic radius range",
    route = "exact": "exact (all times) or windowed",
    t = "-8..8": "Time window of the windowed route",
    steps = "321": "Time nodes of the windowed route",
    ratio_tol = "3": "Bound on max/median of the per-radius values",
]);

command_args!(HartreeSolveArgs, "hartree.solve", [
    omega = "yukawa:b=1,c=1": "Kernel: yukawa:b=..,c=.. | bracket:alpha=.. | table:<path>",
    p = "2": "Exponent with ω ∈ L^p",
    t_final = "auto" as "T": "Final time, or auto",
    nu = "0.5": "Coulomb coupling",
    datum = "builtin": "builtin, or a field JSON file",
    norm = "0.5": "L² norm of the builtin datum",
    intervals = "16": "Time intervals on [0, T]",
    tol = "1e-10": "Stopping distance",
    max_iters = "30": "Iteration cap",
    drift_tol = "1e-2": "Tolerance of the mass drift",
    certificate = "true": "Evaluate the well-posedness norms",
]);
