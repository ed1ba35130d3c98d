//! Command-line front end for `cuspsurf-core`: point evaluation, curve and
//! lattice export, and the invariant suite.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};
use error::Result;

pub fn run<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let cfg = config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Eval(a) => commands::eval::run(a, cfg.eval),
        Command::Curve(a) => commands::curve::run(a, cfg.curve),
        Command::Grid(a) => commands::grid::run(a, cfg.grid),
        Command::Invariants(a) => commands::invariants::run(a, cfg.invariants),
        Command::Reflect(a) => commands::reflect::run(a, cfg.reflect),
    }
}
