//! Lattice propagation of the frame field with orthogonality-preserving
//! rational steps, plus an adaptive reference integrator used as an oracle.

use alloc::vec::Vec;

use nalgebra::{Matrix4, Vector4};

use crate::connection::{omega1_matrix, omega2_matrix, ConnCoeffs, Connection, SurfaceConnection};
use crate::error::{domain, Error, Result};

/// Columns are `[phi, X_alpha, X_beta, xi]`.
pub type Frame = Matrix4<f64>;

pub const PHI: usize = 0;
pub const X_ALPHA: usize = 1;
pub const X_BETA: usize = 2;
pub const XI: usize = 3;

/// `t = 4/(4 + d^2 nu2)` and `s = 2t - 1` for one step of signed length `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFactors {
    pub s: f64,
    pub t: f64,
    pub nu2: f64,
}

pub fn step_factors(nu2: f64, d: f64) -> StepFactors {
    let q = d * d * nu2;
    StepFactors {
        s: (4.0 - q) / (4.0 + q),
        t: 4.0 / (4.0 + q),
        nu2,
    }
}

/// Cayley step for a skew generator of the form `v e_hub^T - e_hub v^T`
/// (with `v[hub] = 0`): returns `F (I + t d (W + (d/2) W^2))`.
pub fn cayley_star_step(f: &Frame, hub: usize, v: &[f64; 4], d: f64) -> Frame {
    debug_assert!(v[hub] == 0.0);
    let nu2 = v.iter().map(|c| c * c).sum::<f64>();
    let t = step_factors(nu2, d).t;
    let hub_col: Vector4<f64> = f.column(hub).into_owned();
    let mut y = Vector4::zeros();
    for (k, c) in v.iter().enumerate() {
        if k != hub && *c != 0.0 {
            y += f.column(k) * *c;
        }
    }
    let mid = hub_col + y * (0.5 * d);
    let mut out = *f;
    out.set_column(hub, &(hub_col + (y - hub_col * (0.5 * d * nu2)) * (t * d)));
    for (k, c) in v.iter().enumerate() {
        if k != hub && *c != 0.0 {
            let col: Vector4<f64> = f.column(k) - mid * (t * d * c);
            out.set_column(k, &col);
        }
    }
    out
}

fn star_x(c: &ConnCoeffs) -> [f64; 4] {
    [c.a1, 0.0, -c.c1, -c.b1]
}

fn star_y(c: &ConnCoeffs) -> [f64; 4] {
    [c.a2, -c.c2, 0.0, -c.b2]
}

/// One step along x with the coefficients frozen at `base`.
pub fn step_x_coeffs(f: &Frame, c: &ConnCoeffs, dx: f64) -> Frame {
    cayley_star_step(f, X_ALPHA, &star_x(c), dx)
}

/// One step along y with the coefficients frozen at `base`.
pub fn step_y_coeffs(f: &Frame, c: &ConnCoeffs, dy: f64) -> Frame {
    cayley_star_step(f, X_BETA, &star_y(c), dy)
}

pub fn step_x_with<C: Connection>(conn: &C, f: &Frame, base: (f64, f64), dx: f64) -> Result<Frame> {
    Ok(step_x_coeffs(f, &conn.coeffs(base.0, base.1)?, dx))
}

pub fn step_y_with<C: Connection>(conn: &C, f: &Frame, base: (f64, f64), dy: f64) -> Result<Frame> {
    Ok(step_y_coeffs(f, &conn.coeffs(base.0, base.1)?, dy))
}

pub fn step_x(f: &Frame, base: (f64, f64), dx: f64) -> Result<Frame> {
    step_x_with(&SurfaceConnection, f, base, dx)
}

pub fn step_y(f: &Frame, base: (f64, f64), dy: f64) -> Result<Frame> {
    step_y_with(&SurfaceConnection, f, base, dy)
}

/// `max |F^T F - I|`.
pub fn orthogonality_defect(f: &Frame) -> f64 {
    (f.transpose() * f - Frame::identity()).amax()
}

pub fn frobenius(m: &Frame) -> f64 {
    m.norm()
}

/// Closest orthogonal matrix to a nearly orthogonal one, by Newton iteration
/// for the polar factor.
pub fn polar_orthonormalize(f: &Frame) -> Frame {
    let mut q = *f;
    for _ in 0..8 {
        let e = q.transpose() * q - Frame::identity();
        if e.amax() < 1e-15 {
            break;
        }
        q = q * (Frame::identity() * 1.5 - (q.transpose() * q) * 0.5);
    }
    q
}

/// A square lattice `[x0, x0+a] x [y0, y0+a]` with `n` divisions per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x0: f64,
    pub y0: f64,
    pub a: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(x0: f64, y0: f64, a: f64, n: usize) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(domain("a", a));
        }
        if n == 0 {
            return Err(domain("n", 0.0));
        }
        if !(x0 > 0.0) {
            return Err(domain("x0", x0));
        }
        Ok(GridSpec { x0, y0, a, n })
    }

    pub fn delta(&self) -> f64 {
        self.a / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.a * (i as f64 / self.n as f64)
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + self.a * (j as f64 / self.n as f64)
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        let slack = 1e-12 * self.a;
        p.0 >= self.x0 - slack
            && p.0 <= self.x0 + self.a + slack
            && p.1 >= self.y0 - slack
            && p.1 <= self.y0 + self.a + slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Right,
    Up,
}

/// A monotone lattice path starting at the corner `P_{0,0}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LatticePath {
    pub steps: Vec<Move>,
}

impl LatticePath {
    pub fn new(steps: Vec<Move>) -> Self {
        LatticePath { steps }
    }

    /// `i` moves right followed by `j` moves up.
    pub fn lower(i: usize, j: usize) -> Self {
        let mut steps = Vec::with_capacity(i + j);
        steps.extend(core::iter::repeat_n(Move::Right, i));
        steps.extend(core::iter::repeat_n(Move::Up, j));
        LatticePath { steps }
    }

    /// `j` moves up followed by `i` moves right.
    pub fn upper(i: usize, j: usize) -> Self {
        let mut steps = Vec::with_capacity(i + j);
        steps.extend(core::iter::repeat_n(Move::Up, j));
        steps.extend(core::iter::repeat_n(Move::Right, i));
        LatticePath { steps }
    }

    pub fn end(&self) -> (usize, usize) {
        self.steps.iter().fold((0, 0), |(i, j), m| match m {
            Move::Right => (i + 1, j),
            Move::Up => (i, j + 1),
        })
    }
}

fn walk<C: Connection>(
    conn: &C,
    steps: &[Move],
    xs: impl Fn(usize) -> f64,
    ys: impl Fn(usize) -> f64,
    f0: &Frame,
    mut visit: impl FnMut(usize, usize, &Frame),
) -> Result<Frame> {
    let (mut i, mut j) = (0usize, 0usize);
    let mut f = *f0;
    visit(i, j, &f);
    for m in steps {
        let base = (xs(i), ys(j));
        match m {
            Move::Right => {
                f = step_x_with(conn, &f, base, xs(i + 1) - base.0)?;
                i += 1;
            }
            Move::Up => {
                f = step_y_with(conn, &f, base, ys(j + 1) - base.1)?;
                j += 1;
            }
        }
        visit(i, j, &f);
    }
    Ok(f)
}

pub fn propagate_with<C: Connection>(conn: &C, path: &LatticePath, grid: &GridSpec, f0: &Frame) -> Result<Frame> {
    let (i, j) = path.end();
    if i > grid.n || j > grid.n {
        return Err(Error::PathOutOfGrid);
    }
    walk(conn, &path.steps, |i| grid.x(i), |j| grid.y(j), f0, |_, _, _| {})
}

pub fn propagate(path: &LatticePath, grid: &GridSpec, f0: &Frame) -> Result<Frame> {
    propagate_with(&SurfaceConnection, path, grid, f0)
}

/// Frames at every lattice point visited by `path`, including the start.
pub fn propagate_trace<C: Connection>(
    conn: &C,
    path: &LatticePath,
    grid: &GridSpec,
    f0: &Frame,
) -> Result<Vec<((usize, usize), Frame)>> {
    let (i, j) = path.end();
    if i > grid.n || j > grid.n {
        return Err(Error::PathOutOfGrid);
    }
    let mut out = Vec::with_capacity(path.steps.len() + 1);
    walk(conn, &path.steps, |i| grid.x(i), |j| grid.y(j), f0, |i, j, f| out.push(((i, j), *f)))?;
    Ok(out)
}

/// Number of equal sub-intervals of `[0, len]` no wider than `delta`.
fn divisions(len: f64, delta: f64, n: usize) -> usize {
    let s = libm::ceil(len / delta - 1e-9) as usize;
    s.clamp(1, n)
}

/// Frames at `target` along the x-first and the y-first paths of the
/// re-divided sub-rectangle from the grid corner.
pub fn canonical_frames_with<C: Connection>(
    conn: &C,
    grid: &GridSpec,
    target: (f64, f64),
    f0: &Frame,
) -> Result<(Frame, Frame)> {
    if !grid.contains(target) {
        return Err(Error::PathOutOfGrid);
    }
    let (lx, ly) = (target.0 - grid.x0, target.1 - grid.y0);
    let s = divisions(lx, grid.delta(), grid.n);
    let t = divisions(ly, grid.delta(), grid.n);
    let xs = |i: usize| if i == s { target.0 } else { grid.x0 + lx * (i as f64 / s as f64) };
    let ys = |j: usize| if j == t { target.1 } else { grid.y0 + ly * (j as f64 / t as f64) };
    let lower = walk(conn, &LatticePath::lower(s, t).steps, xs, ys, f0, |_, _, _| {})?;
    let upper = walk(conn, &LatticePath::upper(s, t).steps, xs, ys, f0, |_, _, _| {})?;
    Ok((lower, upper))
}

pub fn canonical_frames(grid: &GridSpec, target: (f64, f64), f0: &Frame) -> Result<(Frame, Frame)> {
    canonical_frames_with(&SurfaceConnection, grid, target, f0)
}

/// Frobenius norm of the difference of the two frames obtained around one
/// plaquette of side `delta` with lower-left corner `base`, starting from the
/// identity.
pub fn plaquette_defect<C: Connection>(conn: &C, base: (f64, f64), delta: f64) -> Result<f64> {
    let id = Frame::identity();
    let f1 = step_x_with(conn, &id, base, delta)?;
    let lower = step_y_with(conn, &f1, (base.0 + delta, base.1), delta)?;
    let f2 = step_y_with(conn, &id, base, delta)?;
    let upper = step_x_with(conn, &f2, (base.0, base.1 + delta), delta)?;
    Ok(frobenius(&(lower - upper)))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    let lx: Vec<f64> = xs.iter().map(|v| libm::log(*v)).collect();
    let ly: Vec<f64> = ys.iter().map(|v| libm::log(*v)).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in lx.iter().zip(ly.iter()) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// The constants controlling the lattice convergence bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceK {
    pub k1: f64,
    pub k2: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Copy)]
struct Jet {
    c: ConnCoeffs,
    dx: ConnCoeffs,
    dy: ConnCoeffs,
    c2_xx: f64,
    c1_yy: f64,
}

fn diff3<C: Connection>(conn: &C, x: f64, y: f64, h: f64, along_x: bool) -> Result<([f64; 6], [f64; 6], [f64; 6])> {
    let (p, m) = if along_x {
        (conn.coeffs(x + h, y)?, conn.coeffs(x - h, y)?)
    } else {
        (conn.coeffs(x, y + h)?, conn.coeffs(x, y - h)?)
    };
    Ok((p.as_array(), m.as_array(), conn.coeffs(x, y)?.as_array()))
}

fn jet<C: Connection>(conn: &C, x: f64, y: f64, h: f64) -> Result<Jet> {
    let mut d1 = [[0.0; 6]; 2];
    let mut d2 = [[0.0; 6]; 2];
    for (axis, along_x) in [true, false].into_iter().enumerate() {
        let (p1, m1, c) = diff3(conn, x, y, h, along_x)?;
        let (p2, m2, _) = diff3(conn, x, y, 0.5 * h, along_x)?;
        for k in 0..6 {
            let g1 = (p1[k] - m1[k]) / (2.0 * h);
            let g2 = (p2[k] - m2[k]) / h;
            d1[axis][k] = (4.0 * g2 - g1) / 3.0;
            let s1 = (p1[k] - 2.0 * c[k] + m1[k]) / (h * h);
            let s2 = (p2[k] - 2.0 * c[k] + m2[k]) / (0.25 * h * h);
            d2[axis][k] = (4.0 * s2 - s1) / 3.0;
        }
    }
    Ok(Jet {
        c: conn.coeffs(x, y)?,
        dx: ConnCoeffs::from_array(d1[0]),
        dy: ConnCoeffs::from_array(d1[1]),
        c2_xx: d2[0][5],
        c1_yy: d2[1][2],
    })
}

fn hypot3(a: f64, b: f64, c: f64) -> f64 {
    libm::sqrt(a * a + b * b + c * c)
}

/// Largest norm of the four cubic plaquette-defect coefficient vectors.
fn k1_at(j: &Jet) -> f64 {
    let c = &j.c;
    let pa = c.c1 * (j.dy.a2 - c.a1 * c.c2);
    let pb = c.c2 * (j.dx.a1 - c.a2 * c.c1);
    let qa = c.c1 * (j.dy.b2 - c.b1 * c.c2);
    let qb = c.c2 * (j.dx.b1 - c.b2 * c.c1);
    let l = j.c2_xx + j.c1_yy + c.c1 * (c.a2 * c.a2 + c.b2 * c.b2) + c.c2 * (c.a1 * c.a1 + c.b1 * c.b1);
    0.5 * hypot3(pa, pb, 0.0)
        .max(hypot3(qa, qb, 0.0))
        .max(hypot3(pa, qa, l))
        .max(hypot3(pb, qb, l))
}

fn k2_at(j: &Jet) -> f64 {
    let n1 = omega1_matrix(&j.c).norm();
    let n2 = omega2_matrix(&j.c).norm();
    let d1 = omega1_matrix(&j.dx).norm() * 0.5;
    let d2 = omega2_matrix(&j.dy).norm() * 0.5;
    n1.max(n2).max(d1).max(d2)
}

pub const K_FD_STEP: f64 = 1e-4;

/// `K = max(K1, K2) + 1` sampled on a `samples x samples` grid over the
/// lattice rectangle.
pub fn estimate_k_with<C: Connection>(conn: &C, grid: &GridSpec, samples: usize) -> Result<ConvergenceK> {
    let m = samples.max(2);
    let (mut k1, mut k2) = (0.0f64, 0.0f64);
    for i in 0..m {
        for jdx in 0..m {
            let x = grid.x0 + grid.a * (i as f64 / (m - 1) as f64);
            let y = grid.y0 + grid.a * (jdx as f64 / (m - 1) as f64);
            let j = jet(conn, x, y, K_FD_STEP)?;
            k1 = k1.max(k1_at(&j));
            k2 = k2.max(k2_at(&j));
        }
    }
    Ok(ConvergenceK { k1, k2, k: k1.max(k2) + 1.0 })
}

pub fn estimate_k(grid: &GridSpec, samples: usize) -> Result<ConvergenceK> {
    estimate_k_with(&SurfaceConnection, grid, samples)
}

/// `delta (exp(2 K a) - 1)`.
pub fn global_error_bound(k: f64, a: f64, delta: f64) -> f64 {
    delta * libm::expm1(2.0 * k * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// An axis-aligned segment from `start` of signed length `length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: (f64, f64),
    pub axis: Axis,
    pub length: f64,
}

impl Segment {
    pub fn end(&self) -> (f64, f64) {
        match self.axis {
            Axis::X => (self.start.0 + self.length, self.start.1),
            Axis::Y => (self.start.0, self.start.1 + self.length),
        }
    }
}

const REF_MAX_STEPS: usize = 2_000_000;

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `dF/ds = F Omega(s)` along the segment with an adaptive
/// Dormand-Prince 5(4) scheme, projecting back onto the orthogonal group
/// after every accepted step.
pub fn reference_frame_with<C: Connection>(conn: &C, seg: &Segment, f0: &Frame, tol: f64) -> Result<Frame> {
    if seg.length == 0.0 {
        return Ok(*f0);
    }
    if !(tol > 0.0) {
        return Err(domain("tol", tol));
    }
    let gen = |s: f64| -> Result<Matrix4<f64>> {
        Ok(match seg.axis {
            Axis::X => omega1_matrix(&conn.coeffs(seg.start.0 + s, seg.start.1)?),
            Axis::Y => omega2_matrix(&conn.coeffs(seg.start.0, seg.start.1 + s)?),
        })
    };
    let total = seg.length.abs();
    let dir = if seg.length > 0.0 { 1.0 } else { -1.0 };
    let mut s = 0.0f64;
    let mut f = *f0;
    let mut h = (total * 1e-2).min(1e-2);
    let mut k1 = f * gen(0.0)?;
    let mut steps = 0usize;
    while s < total {
        steps += 1;
        if steps > REF_MAX_STEPS {
            return Err(Error::ToleranceNotMet { tol });
        }
        if s + h > total {
            h = total - s;
        }
        let hs = dir * h;
        let at = |c: f64| dir * (s + c * h);
        let k2 = (f + k1 * (A21 * hs)) * gen(at(1.0 / 5.0))?;
        let k3 = (f + (k1 * A31 + k2 * A32) * hs) * gen(at(3.0 / 10.0))?;
        let k4 = (f + (k1 * A41 + k2 * A42 + k3 * A43) * hs) * gen(at(4.0 / 5.0))?;
        let k5 = (f + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * hs) * gen(at(8.0 / 9.0))?;
        let k6 = (f + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * hs) * gen(at(1.0))?;
        let next = f + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * hs;
        let k7 = next * gen(at(1.0))?;
        let err = ((k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * hs).amax();
        if err <= tol || h <= 1e-14 * total.max(1.0) {
            s += h;
            f = polar_orthonormalize(&next);
            k1 = f * gen(dir * s)?;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * libm::pow(tol / err, 0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(f)
}

pub fn reference_frame(seg: &Segment, f0: &Frame, tol: f64) -> Result<Frame> {
    reference_frame_with(&SurfaceConnection, seg, f0, tol)
}

/// Reference frame at `target` reached from `start` along x then y.
pub fn reference_frame_at<C: Connection>(
    conn: &C,
    start: (f64, f64),
    target: (f64, f64),
    f0: &Frame,
    tol: f64,
) -> Result<Frame> {
    let sx = Segment { start, axis: Axis::X, length: target.0 - start.0 };
    let f1 = reference_frame_with(conn, &sx, f0, tol)?;
    let sy = Segment { start: (target.0, start.1), axis: Axis::Y, length: target.1 - start.1 };
    reference_frame_with(conn, &sy, &f1, tol)
}
