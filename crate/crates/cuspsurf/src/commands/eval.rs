use cuspsurf_core::connection::classify_point;
use cuspsurf_core::specfun::{self, DEFAULT_TOL};
use cuspsurf_core::Error;

use crate::args::EvalArgs;
use crate::config::EvalSection;
use crate::error::{CliError, Result};
use crate::formats::{num, write_table, Sink};

const HEADER: [&str; 14] = [
    "x", "y", "X0", "X0p", "X0p_over_x", "X0pp", "tau", "h", "B2", "C2", "kappa1", "kappa2", "kappa3", "class",
];

pub fn run(args: EvalArgs, cfg: EvalSection) -> Result<()> {
    let xs = if args.x.is_empty() { cfg.x.unwrap_or_default() } else { args.x };
    if xs.is_empty() {
        return Err(CliError::Usage("eval needs at least one --x".into()));
    }
    let ys = if !args.y.is_empty() { args.y } else { cfg.y.unwrap_or_else(|| vec![0.0]) };
    let tol = args.tol.or(cfg.tol).unwrap_or(DEFAULT_TOL);

    let mut rows = Vec::new();
    for &x in &xs {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain { what: "x", value: x }.into());
        }
        let e = specfun::eval_x0(x, tol)?;
        for &y in &ys {
            if !y.is_finite() {
                return Err(Error::Domain { what: "y", value: y }.into());
            }
            let s = specfun::derived_scalars(x, y, tol, false)?;
            let mut row: Vec<String> = [x, y, e.value, e.d1, e.d1_over_x, e.d2, s.tau, s.h, s.b2, s.c2, s.kappa1, s.kappa2, s.kappa3]
                .iter()
                .map(|v| num(*v))
                .collect();
            row.push(classify_point(x, y).name().to_string());
            rows.push(row);
        }
    }
    let header: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
    write_table(Sink::open(None)?, &header, rows)
}
