//! Command-line arguments. Every scenario's flags double as its config
//! `parameters` object, so each field is optional and merged with the file.

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "dsgrav", version, about = "Scenario runner for SO(4,1) gauge-theory gravity")]
pub struct Cli {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized checks (recorded in the report).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides DSGRAV_OUT_DIR and the config file).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Base name of the output files.
    #[arg(long, global = true)]
    pub stem: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Structure relations and Jacobi identities of the generators.
    Algebra(AlgebraArgs),
    /// Wilson-action convergence and lattice gauge invariance.
    Lattice(LatticeArgs),
    /// Field-equation residuals under grid refinement.
    Field(FieldArgs),
    /// Perihelion precession of a bound orbit.
    Orbit(OrbitArgs),
    /// Precession, light bending, redshift and the radial potential against their oracles.
    ClassicTests(ClassicArgs),
    /// First post-Newtonian field of a set of bodies.
    Pn(PnArgs),
    /// Binary-pulsar radiation and period decay; `pulsar sweep` scans eccentricity.
    Pulsar(PulsarArgs),
    /// Homogeneous cosmology; `cosmo compare` pairs both algebras.
    Cosmo(CosmoArgs),
    /// Run whatever scenario the config file names.
    Run,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraArgs {
    /// `verify` (the only action).
    pub action: Option<String>,
    /// desitter, so5, poincare or all.
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeArgs {
    /// `converge` (the only action).
    pub action: Option<String>,
    /// so5 or desitter.
    #[arg(long)]
    pub mode: Option<String>,
    /// Coarsest lattice spacing.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Number of lattice sizes (each halves the spacing).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Edge length of the hypercube.
    #[arg(long)]
    pub length: Option<f64>,
    /// Amplitude of the smooth test connection.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Gauss-Legendre nodes per axis for the continuum action.
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldArgs {
    /// `residual` (the only action).
    pub action: Option<String>,
    /// spherical, cosmo or custom.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Number of grid spacings (each halves the previous).
    #[arg(long)]
    pub refine: Option<usize>,
    /// Stencil order for the spherical scenario: 2, 4 or 6.
    #[arg(long)]
    pub order: Option<usize>,
    /// Central mass for the spherical scenario, e.g. "1 m".
    #[arg(long)]
    pub mass: Option<String>,
    /// Coarsest spacing.
    #[arg(long)]
    pub h: Option<f64>,
    /// Evaluation point "x,y,z" for the spherical scenario.
    #[arg(long)]
    pub at: Option<String>,
    /// Grid file for the custom scenario.
    #[arg(long)]
    pub grid: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitArgs {
    /// Central mass, e.g. "1 Msun".
    #[arg(long)]
    pub mass: Option<String>,
    /// Semi-major axis, e.g. "0.387098 AU".
    #[arg(long)]
    pub a: Option<String>,
    /// Eccentricity.
    /// Orbital eccentricity
    #[arg(long)]
    pub e: Option<f64>,
    /// Number of orbits (at least 3).
    #[arg(long)]
    pub orbits: Option<usize>,
    /// Integrator tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicArgs {
    /// Integrator tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PnArgs {
    /// `field` (the only action).
    pub action: Option<String>,
    /// Bodies file; a default circular binary is used when absent.
    #[arg(long)]
    pub bodies: Option<PathBuf>,
    /// Field point "x,y,z" in the bodies file's length unit.
    #[arg(long)]
    pub at: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulsarArgs {
    /// Optional `sweep`.
    pub action: Option<String>,
    /// Pulsar mass, e.g. "1.4414 Msun".
    #[arg(long)]
    pub mp: Option<String>,
    /// Companion mass.
    #[arg(long)]
    pub mc: Option<String>,
    /// Orbital period, e.g. "27906.98 s".
    #[arg(long)]
    pub pb: Option<String>,
    /// Orbital eccentricity
    #[arg(long)]
    pub e: Option<f64>,
    /// Trajectory samples per orbit for the numeric quadrupole power.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Eccentricities for `sweep`, comma separated.
    #[arg(long)]
    pub eccentricities: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosmoArgs {
    /// Optional `compare`.
    pub action: Option<String>,
    /// desitter or poincare.
    #[arg(long)]
    pub mode: Option<String>,
    /// Scale factor at t0
    #[arg(long)]
    pub a0: Option<f64>,
    /// Reference time (sets the time unit)
    #[arg(long)]
    pub t0: Option<f64>,
    /// Matter density at t0
    #[arg(long)]
    pub rho0: Option<f64>,
    /// b(t0) for the Poincare closed form
    #[arg(long)]
    pub b0: Option<f64>,
    /// Torsion c at t0
    #[arg(long)]
    pub c0: Option<f64>,
    /// Torsion d at t0 (with d'(t0) = 0)
    #[arg(long)]
    pub d0: Option<f64>,
    /// First sample time (default t0/100)
    #[arg(long)]
    pub from: Option<f64>,
    /// Last sample time (default 10 t0)
    #[arg(long)]
    pub to: Option<f64>,
    /// Number of log-spaced time samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Integrator tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}
