use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "cuspsurf", version, about = "Frame fields, curves and checks for a family of cuspidal surfaces")]
pub struct Cli {
    /// TOML file with one table per subcommand; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the special functions and scalars at points as CSV.
    Eval(EvalArgs),
    /// Build a coordinate curve and write it as CSV or PLY.
    Curve(CurveArgs),
    /// Integrate the frame field over a lattice and write every node.
    Grid(GridArgs),
    /// Run the invariant checks and report.
    Invariants(InvariantsArgs),
    /// Sample a y-curve on the back side x < 0.
    Reflect(ReflectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKindArg {
    X,
    Y,
    Diagonal,
    /// x-curve in the coordinate u = -log x.
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Ply,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub x: Vec<f64>,
    /// Defaults to 0.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub y: Vec<f64>,
    /// Tolerance for the series of X0.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_enum)]
    pub kind: Option<CurveKindArg>,
    /// The fixed x of a y-curve.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// The fixed y of an x-curve or u-curve.
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    /// Parameter range; for `u` it is a range of u = -log x.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub range: Option<Vec<f64>>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Initial frame: 16 numbers, row major. Identity if absent.
    #[arg(long, value_name = "FILE")]
    pub init: Option<PathBuf>,
    /// Output file; CSV goes to stdout if absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Lower-left corner and side length.
    #[arg(long, num_args = 3, value_names = ["X0", "Y0", "A"], allow_negative_numbers = true)]
    pub rect: Option<Vec<f64>>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_name = "FILE")]
    pub init: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct InvariantsArgs {
    /// Run only the named checks; `--list` shows the names.
    #[arg(long, num_args = 1..)]
    pub only: Vec<String>,
    #[arg(long)]
    pub list: bool,
    /// Override a bound, as `name=value`.
    #[arg(long = "bound", value_name = "NAME=VALUE")]
    pub bounds: Vec<String>,
    /// Rectangle for the convergence-order checks.
    #[arg(long, num_args = 3, value_names = ["X0", "Y0", "A"], allow_negative_numbers = true)]
    pub rect: Option<Vec<f64>>,
    /// Finest lattice of the convergence-order checks.
    #[arg(long)]
    pub n: Option<usize>,
    /// Write the JSON report here.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReflectArgs {
    /// Nonzero; negative values select the back side.
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Half width `a` of the symmetric range `[-a, a]`.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Even number of steps.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Bound on the reflection residual.
    #[arg(long)]
    pub tol: Option<f64>,
}
