use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use steerkit::{Backend, GridSpec, Pairing};

const CSV_HELP: &str = "Write plot data as CSV with columns series,label,x,y. \
Rows are grouped by series in a fixed order and end with the reference lines \
r = 5/12, 0.4517 and 1/2 (series `reference`, x = y = r).";

/// Batch verification runs for noisy qubit measurement simulations.
///
/// Exit status: 0 when every check passed, 1 when a check failed (the
/// failing inputs are written to a counterexample file that `--replay`
/// accepts), 2 for usage errors and indeterminate results.
#[derive(Parser, Clone, Debug, Serialize, Deserialize)]
#[command(name = "steerkit", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, long_help = CSV_HELP)]
    pub csv: Option<PathBuf>,

    /// Re-run the command and inputs stored in a counterexample file.
    #[arg(long, global = true)]
    pub replay: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Simulate two- or three-outcome POVMs at visibility 1/2.
    Simulate3(Simulate3Args),
    /// Simulate four-outcome POVMs at visibility 1/2.
    Simulate4(Simulate4Args),
    /// Build and verify LHS models for the Werner state.
    LhsCheck(LhsCheckArgs),
    /// Bisect the PVM simulation radius of a parent POVM.
    Radius(RadiusArgs),
    /// Decide whether a parent simulates a child, with a witness either way.
    Farkas(FarkasArgs),
    /// Five-effect parent: PVM radius against the three-outcome certificate.
    Separation(SeparationArgs),
    /// Direct LP against the sign-pattern parent of random four-outcome POVMs.
    Stress(StressArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate3(_) => "simulate3",
            Command::Simulate4(_) => "simulate4",
            Command::LhsCheck(_) => "lhs-check",
            Command::Radius(_) => "radius",
            Command::Farkas(_) => "farkas",
            Command::Separation(_) => "separation",
            Command::Stress(_) => "stress",
        }
    }
}

/// Where the POVMs of a sweep come from.
#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct Source {
    /// POVM JSON file.
    #[arg(long, conflicts_with = "random")]
    pub povm: Option<PathBuf>,

    /// Number of seeded random extremal POVMs.
    #[arg(long)]
    pub random: Option<usize>,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    /// Sum quadrature nodes over each region.
    Quadrature,
    /// Exact spherical-polygon areas and moments.
    Exact,
}

impl BackendKind {
    pub fn resolve(self, grid: &GridSpec) -> steerkit::Result<Backend> {
        Ok(match self {
            BackendKind::Quadrature => Backend::Quadrature(grid.load()?),
            BackendKind::Exact => Backend::ExactPolygon,
        })
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct Simulate3Args {
    #[command(flatten)]
    pub source: Source,

    /// Largest accepted reconstruction residual.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct Simulate4Args {
    #[command(flatten)]
    pub source: Source,

    /// Quadrature grid: lebedev:N, product:PxA or file:PATH.
    #[arg(long, default_value = "lebedev:131")]
    pub grid: GridSpec,

    #[arg(long, value_enum, default_value_t = BackendKind::Quadrature)]
    pub backend: BackendKind,

    /// Outcome pairing for the pseudo-effect: 12-34, 13-24 or 14-23.
    #[arg(long, default_value = "12-34")]
    pub pairing: Pairing,

    /// Largest accepted residual [default: 2e-3 for quadrature, 1e-9 exact].
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct LhsCheckArgs {
    /// Werner visibility, at most 1/2.
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,

    /// Number of random POVMs.
    #[arg(long, default_value_t = 100)]
    pub n: usize,

    /// Check this POVM instead of random ones.
    #[arg(long)]
    pub povm: Option<PathBuf>,

    /// Outcome count of the random POVMs (2, 3 or 4).
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(2..=4))]
    pub outcomes: u8,

    #[arg(long, default_value = "lebedev:131")]
    pub grid: GridSpec,

    #[arg(long, value_enum, default_value_t = BackendKind::Quadrature)]
    pub backend: BackendKind,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct RadiusArgs {
    /// Parent POVM JSON file.
    #[arg(long)]
    pub parent: PathBuf,

    /// Fibonacci-sphere directions; a further n/4 random ones are added.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Points of the feasibility scan written with --csv.
    #[arg(long, default_value_t = 51)]
    pub scan_points: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct FarkasArgs {
    /// Parent POVM JSON file.
    #[arg(long)]
    pub parent: PathBuf,

    /// Child POVM JSON file.
    #[arg(long)]
    pub child: PathBuf,

    /// Visibility applied to the child, overriding its file.
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SeparationArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, default_value_t = 51)]
    pub scan_points: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct StressArgs {
    /// Number of random four-outcome POVMs.
    #[arg(long, default_value_t = 500)]
    pub n: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, default_value = "lebedev:131")]
    pub grid: GridSpec,

    /// Parent construction; `quadrature` can leave thin regions without nodes.
    #[arg(long, value_enum, default_value_t = BackendKind::Exact)]
    pub backend: BackendKind,
}
