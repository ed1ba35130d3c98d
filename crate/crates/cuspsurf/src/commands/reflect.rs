use cuspsurf_core::curves::*;
use cuspsurf_core::integrator::Frame;
use cuspsurf_core::Error;

use crate::args::ReflectArgs;
use crate::config::ReflectSection;
use crate::error::{CliError, Result};
use crate::formats::{frame_fields, frame_header, num, write_table, Sink};

pub const DEFAULT_N: usize = 400;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Samples of the y-curve through `x`, normalized at `y = 0`; for `x < 0`
/// they are the back-side copies of the curve at `-x`.
pub fn samples(x: f64, half_width: f64, n: usize) -> Result<(Vec<FieldSample>, f64)> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain { what: "x", value: x }.into());
    }
    if !n.is_multiple_of(2) {
        return Err(CliError::Usage("--n must be even so that y = 0 is a sample".into()));
    }
    let mut c = build_y_curve(x.abs(), (-half_width, half_width), n, &Frame::identity())?;
    let z = c.nearest(0.0);
    c.renormalize_at(z);
    let residual = reflection_residual(&c)?;
    let front: Vec<FieldSample> = c
        .params
        .iter()
        .zip(&c.points)
        .zip(&c.frames)
        .map(|((y, p), f)| FieldSample { x: x.abs(), y: *y, frame: *f, point: *p })
        .collect();
    let out = if x < 0.0 { reflect_to_dminus(&front) } else { front };
    Ok((out, residual))
}

pub fn run(args: ReflectArgs, cfg: ReflectSection) -> Result<()> {
    let x = args.x.or(cfg.x).ok_or_else(|| CliError::Usage("reflect needs --x".into()))?;
    let a = args.half_width.or(cfg.half_width).ok_or_else(|| CliError::Usage("reflect needs --half-width".into()))?;
    let n = args.n.or(cfg.n).unwrap_or(DEFAULT_N);
    let tol = args.tol.or(cfg.tol).unwrap_or(DEFAULT_TOL);
    let (s, residual) = samples(x, a, n)?;

    let mut header: Vec<String> = ["x", "y", "p0", "p1", "p2", "p3"].iter().map(|s| s.to_string()).collect();
    header.extend(frame_header());
    let rows = s.iter().map(|fs| {
        let mut row = vec![num(fs.x), num(fs.y)];
        row.extend(fs.point.iter().map(|v| num(*v)));
        row.extend(frame_fields(&fs.frame));
        row
    });
    let output = args.output.or(cfg.output);
    write_table(Sink::open(output.as_deref())?, &header, rows)?;
    eprintln!("max |B f(x,-y) - f(x,y)| = {residual:.3e} (bound {tol:e})");
    if residual > tol {
        return Err(CliError::Invariant(format!("reflection residual {residual:e} exceeds {tol:e}")));
    }
    Ok(())
}
