use cuspsurf_core::curves::{x_point, y_point, Point};
use cuspsurf_core::integrator::*;
use cuspsurf_core::specfun;

use crate::args::{Format, GridArgs};
use crate::config::GridSection;
use crate::error::{CliError, Result};
use crate::formats::{frame_fields, frame_header, init_frame, num, project, write_ply, write_table, Sink};

pub const DEFAULT_N: usize = 16;

pub struct Node {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub point: Point,
    pub frame: Frame,
}

/// Frames and points at every node, reached along the bottom row and then
/// up each column.
pub fn integrate(grid: &GridSpec, init: &Frame) -> Result<Vec<Node>> {
    let n = grid.n;
    let mut out = Vec::with_capacity((n + 1) * (n + 1));
    let mut foot = *init;
    let mut foot_p = Point::zeros();
    for i in 0..=n {
        if i > 0 {
            let next = step_x(&foot, (grid.x(i - 1), grid.y0), grid.delta())?;
            foot_p += x_point(&next, grid.y0) - x_point(&foot, grid.y0);
            foot = next;
        }
        let e = specfun::x0(grid.x(i))?;
        let mut f = foot;
        let mut p = foot_p;
        for j in 0..=n {
            if j > 0 {
                let next = step_y(&f, (grid.x(i), grid.y(j - 1)), grid.delta())?;
                p += y_point(&next, &e) - y_point(&f, &e);
                f = next;
            }
            out.push(Node { i, j, x: grid.x(i), y: grid.y(j), point: p, frame: f });
        }
    }
    Ok(out)
}

pub fn run(args: GridArgs, cfg: GridSection) -> Result<()> {
    let rect = match (&args.rect, cfg.rect) {
        (Some(r), _) => [r[0], r[1], r[2]],
        (None, Some(r)) => r,
        (None, None) => return Err(CliError::Usage("grid needs --rect X0 Y0 A".into())),
    };
    let n = args.n.or(cfg.n).unwrap_or(DEFAULT_N);
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let grid = GridSpec::new(rect[0], rect[1], rect[2], n)?;
    let init = init_frame(args.init.as_deref().or(cfg.init.as_deref()))?;
    let nodes = integrate(&grid, &init)?;

    let defect = nodes.iter().map(|nd| orthogonality_defect(&nd.frame)).fold(0.0, f64::max);
    let (lo, up) = canonical_frames(&grid, (grid.x(n), grid.y(n)), &init)?;
    eprintln!(
        "grid {n}x{n}, delta {:e}: max |F^T F - I| = {defect:.3e}, path disagreement at far corner = {:.3e}",
        grid.delta(),
        frobenius(&(lo - up))
    );

    let output = args.output.or(cfg.output);
    let format = args.format.or(cfg.format).unwrap_or_else(|| {
        match output.as_deref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("ply") => Format::Ply,
            _ => Format::Csv,
        }
    });
    let sink = Sink::open(output.as_deref())?;
    match format {
        Format::Csv => {
            let mut header: Vec<String> = ["i", "j", "x", "y", "p0", "p1", "p2", "p3"].iter().map(|s| s.to_string()).collect();
            header.extend(frame_header());
            let rows = nodes.iter().map(|nd| {
                let mut row = vec![nd.i.to_string(), nd.j.to_string(), num(nd.x), num(nd.y)];
                row.extend(nd.point.iter().map(|v| num(*v)));
                row.extend(frame_fields(&nd.frame));
                row
            });
            write_table(sink, &header, rows)
        }
        Format::Ply => {
            let pts: Vec<Point> = nodes.iter().map(|nd| nd.point).collect();
            write_ply(sink, "cuspsurf lattice", &project(&pts, &init, &Point::zeros()))
        }
    }
}
