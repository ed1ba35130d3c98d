//! Discrete x-, y- and diagonal curves of the surface, their spheres and
//! cusps, and the asymptotic circle analyses.
//!
//! Along an x-curve the point is `fhat(F, y)/(2 sqrt5)` up to a constant,
//! with `fhat = (X_beta - 2(1+y^2) xi + y phi)/(1+y^2)`; along a y-curve it is
//! `(B2 xi + C2 X_alpha)/(B2^2 + C2^2)`. Both maps are linear in the frame,
//! so summing the per-step increments telescopes and the builders evaluate
//! the maps directly.

mod asymptotic;
mod fit;

pub use asymptotic::*;
pub use fit::*;

use alloc::vec::Vec;

use nalgebra::Vector4;

use crate::connection::{ConnCoeffs, Connection};
use crate::error::{domain, Error, Result};
use crate::integrator::{cayley_star_step, step_x_coeffs, step_y_coeffs, Axis, Frame, PHI, XI, X_ALPHA, X_BETA};
use crate::specfun::{self, X0Eval, SQRT5};

pub type Point = Vector4<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind {
    XCurve { y: f64 },
    YCurve { x: f64 },
    Diagonal,
    /// x-curve parametrized by `u = -log x`.
    UCurve { y: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub kind: CurveKind,
    pub params: Vec<f64>,
    pub points: Vec<Point>,
    pub frames: Vec<Frame>,
}

fn col(f: &Frame, k: usize) -> Point {
    f.column(k).into_owned()
}

// ---------------------------------------------------------------------------
// Distinguished vectors of a frame

/// Non-normalized f-vector of an x-curve, of length `sqrt((5+4y^2)/(1+y^2))`.
pub fn fhat(f: &Frame, y: f64) -> Point {
    let s = 1.0 + y * y;
    (col(f, X_BETA) - col(f, XI) * (2.0 * s) + col(f, PHI) * y) / s
}

/// Unit normal of the x-curve inside its sphere.
pub fn f_vec(f: &Frame, y: f64) -> Point {
    let s = 1.0 + y * y;
    fhat(f, y) * libm::sqrt(s / (5.0 + 4.0 * y * y))
}

/// `u(y) = (y X_beta - phi)/sqrt(1+y^2)`, constant along x-curves.
pub fn u_vec(f: &Frame, y: f64) -> Point {
    (col(f, X_BETA) * y - col(f, PHI)) / libm::sqrt(1.0 + y * y)
}

/// `u2 = (2 X_beta + xi + 2y phi)/sqrt(5+4y^2)`.
pub fn u2_vec(f: &Frame, y: f64) -> Point {
    (col(f, X_BETA) * 2.0 + col(f, XI) + col(f, PHI) * (2.0 * y)) / libm::sqrt(5.0 + 4.0 * y * y)
}

/// `n(x,y) = (X_beta + y phi)/sqrt(1+y^2)`.
pub fn n_vec(f: &Frame, y: f64) -> Point {
    (col(f, X_BETA) + col(f, PHI) * y) / libm::sqrt(1.0 + y * y)
}

/// Radius `(2 sqrt5)^-1 sqrt((5+4y^2)/(1+y^2))` of the x-curve sphere.
pub fn x_curve_radius(y: f64) -> f64 {
    libm::sqrt((5.0 + 4.0 * y * y) / (1.0 + y * y)) / (2.0 * SQRT5)
}

/// The x-curve point up to its constant sphere center.
pub fn x_point(f: &Frame, y: f64) -> Point {
    fhat(f, y) / (2.0 * SQRT5)
}

/// `(B2, C2)` at `x`.
pub fn y_weights(e: &X0Eval) -> (f64, f64) {
    (specfun::b2_from(e), specfun::c2_from(e))
}

pub fn y_curve_radius(e: &X0Eval) -> f64 {
    1.0 / libm::sqrt(specfun::b2c2_sq_from(e))
}

/// The y-curve point up to its constant sphere center.
pub fn y_point(f: &Frame, e: &X0Eval) -> Point {
    let (b, c) = y_weights(e);
    (col(f, XI) * b + col(f, X_ALPHA) * c) / (b * b + c * c)
}

/// Unit normal of the y-curve inside its sphere.
pub fn ftilde_vec(f: &Frame, e: &X0Eval) -> Point {
    let (b, c) = y_weights(e);
    (col(f, XI) * b + col(f, X_ALPHA) * c) / libm::sqrt(b * b + c * c)
}

/// `u~(x) = (-B2 X_alpha + C2 xi)/sqrt(B2^2 + C2^2)`, constant along y-curves.
pub fn utilde_vec(f: &Frame, e: &X0Eval) -> Point {
    let (b, c) = y_weights(e);
    (col(f, XI) * c - col(f, X_ALPHA) * b) / libm::sqrt(b * b + c * c)
}

/// `du/dy` from the structure equations at a point with coefficients `c`.
pub fn du_dy(f: &Frame, y: f64, c: &ConnCoeffs) -> Point {
    let s = 1.0 + y * y;
    let k = 1.0 + s * c.a2;
    let a = (col(f, X_BETA) + col(f, PHI) * y) * k - (col(f, XI) * c.b2 + col(f, X_ALPHA) * c.c2) * (y * s);
    a / (s * libm::sqrt(s))
}

/// `d u~/dx` from the structure equations; `c` are the coefficients at `(x, y)`.
pub fn dutilde_dx(f: &Frame, e: &X0Eval, c: &ConnCoeffs) -> Point {
    let x = e.x;
    let (b, cc) = y_weights(e);
    let b_x = -cc / (2.0 * x);
    let c_x = e.d3 - cc / x;
    let s2 = b * b + cc * cc;
    let s = libm::sqrt(s2);
    let s_x = (b * b_x + cc * c_x) / s;
    let xa = col(f, X_ALPHA);
    let xi = col(f, XI);
    let xa_x = col(f, PHI) * c.a1 - col(f, X_BETA) * c.c1 - xi * c.b1;
    let xi_x = xa * c.b1;
    let v = xi * cc - xa * b;
    let v_x = xi * c_x + xi_x * cc - xa * b_x - xa_x * b;
    v_x / s - v * (s_x / s2)
}

// ---------------------------------------------------------------------------
// Raw tracers

fn star_x(c: &ConnCoeffs) -> [f64; 4] {
    [c.a1, 0.0, -c.c1, -c.b1]
}

/// Frames along `y = y0` at the abscissae `xs`; each step freezes the
/// coefficients at its starting point. No singularity checks.
pub fn trace_x<C: Connection>(conn: &C, y0: f64, xs: &[f64], f0: &Frame) -> Result<Vec<Frame>> {
    let mut out = Vec::with_capacity(xs.len());
    let mut f = *f0;
    out.push(f);
    for w in xs.windows(2) {
        f = step_x_coeffs(&f, &conn.coeffs(w[0], y0)?, w[1] - w[0]);
        out.push(f);
    }
    Ok(out)
}

/// Frames along `x = x0` at the ordinates `ys`. No singularity checks.
pub fn trace_y<C: Connection>(conn: &C, x0: f64, ys: &[f64], f0: &Frame) -> Result<Vec<Frame>> {
    let mut out = Vec::with_capacity(ys.len());
    let mut f = *f0;
    out.push(f);
    if ys.len() < 2 {
        return Ok(out);
    }
    let cs = conn.coeffs_on_vertical(x0, &ys[..ys.len() - 1])?;
    for (w, c) in ys.windows(2).zip(&cs) {
        f = step_y_coeffs(&f, c, w[1] - w[0]);
        out.push(f);
    }
    Ok(out)
}

fn singular_param(axis: Axis, fixed: f64) -> f64 {
    match axis {
        Axis::X => fixed.abs(),
        Axis::Y => 0.0,
    }
}

fn trace<C: Connection>(conn: &C, axis: Axis, fixed: f64, ps: &[f64], f0: &Frame) -> Result<Vec<Frame>> {
    match axis {
        Axis::X => trace_x(conn, fixed, ps, f0),
        Axis::Y => trace_y(conn, fixed, ps, f0),
    }
}

/// Like [`trace_x`]/[`trace_y`], but refuses a step whose base is the
/// curve's singular parameter (`x = |y0|` for x-curves, `y = 0` for
/// y-curves): such a step leaves the point where it is.
pub fn trace_checked<C: Connection>(conn: &C, axis: Axis, fixed: f64, ps: &[f64], f0: &Frame) -> Result<Vec<Frame>> {
    let s = singular_param(axis, fixed);
    if ps.len() > 1 && ps[..ps.len() - 1].contains(&s) {
        return Err(Error::DegenerateStep);
    }
    trace(conn, axis, fixed, ps, f0)
}

/// `m + 1` nodes from `far` to `to`, with `to` hit exactly.
fn nodes_toward(far: f64, to: f64, m: usize) -> Vec<f64> {
    (0..=m)
        .map(|k| if k == m { to } else { far + (to - far) * (k as f64 / m as f64) })
        .collect()
}

/// Frames on `[lo, hi]` along one axis, every piece integrated toward the
/// singular parameter and the two halves joined there by `C = F1 F2^T`.
/// The returned frames are in an arbitrary common gauge.
fn build_line<C: Connection>(conn: &C, axis: Axis, fixed: f64, lo: f64, hi: f64, n: usize) -> Result<(Vec<f64>, Vec<Frame>)> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(domain("range", hi - lo));
    }
    if n == 0 {
        return Err(Error::InsufficientResolution("n must be at least 1"));
    }
    if axis == Axis::X && !(lo > 0.0) {
        return Err(domain("x", lo));
    }
    if axis == Axis::Y && !(fixed > 0.0) {
        return Err(domain("x", fixed));
    }
    let id = Frame::identity();
    let s = singular_param(axis, fixed);
    if lo < s && s < hi {
        if n < 2 {
            return Err(Error::InsufficientResolution("a curve through its singular point needs n >= 2"));
        }
        let n1 = (libm::round(n as f64 * (s - lo) / (hi - lo)) as usize).clamp(1, n - 1);
        let n2 = n - n1;
        let left = nodes_toward(lo, s, n1);
        let lf = trace(conn, axis, fixed, &left, &id)?;
        let mut right = nodes_toward(hi, s, n2);
        let mut rf = trace(conn, axis, fixed, &right, &id)?;
        right.reverse();
        rf.reverse();
        let c = lf[n1] * rf[0].transpose();
        let mut params = left;
        let mut frames = lf;
        params.extend_from_slice(&right[1..]);
        frames.extend(rf[1..].iter().map(|f| c * f));
        Ok((params, frames))
    } else if hi <= s {
        let ps = nodes_toward(lo, hi, n);
        let fs = trace(conn, axis, fixed, &ps, &id)?;
        Ok((ps, fs))
    } else {
        let mut ps = nodes_toward(hi, lo, n);
        let mut fs = trace(conn, axis, fixed, &ps, &id)?;
        ps.reverse();
        fs.reverse();
        Ok((ps, fs))
    }
}

impl CurveSample {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Applies the rigid motion `p -> g p + t` to points and `F -> g F` to frames.
    pub fn apply_rigid(&mut self, g: &Frame, t: &Point) {
        for f in self.frames.iter_mut() {
            *f = g * *f;
        }
        for p in self.points.iter_mut() {
            *p = g * *p + t;
        }
    }

    /// Moves the curve so that sample `idx` has frame `frame` and point `point`.
    pub fn anchor_at(&mut self, idx: usize, frame: &Frame, point: &Point) {
        let g = frame * self.frames[idx].transpose();
        let t = point - g * self.points[idx];
        self.apply_rigid(&g, &t);
    }

    /// Gauge with identity frame and zero point at sample `idx`.
    pub fn renormalize_at(&mut self, idx: usize) {
        self.anchor_at(idx, &Frame::identity(), &Point::zeros());
    }

    /// Index of the sample whose parameter is closest to `p`.
    pub fn nearest(&self, p: f64) -> usize {
        let mut best = 0;
        for (k, q) in self.params.iter().enumerate() {
            if (q - p).abs() < (self.params[best] - p).abs() {
                best = k;
            }
        }
        best
    }

    /// `A_i = point_i - radius * unit normal_i`, the sphere center seen from
    /// each sample. Only for x- and y-curves.
    pub fn sphere_centers(&self) -> Result<Vec<Point>> {
        match self.kind {
            CurveKind::XCurve { y } | CurveKind::UCurve { y } => {
                let r = x_curve_radius(y);
                Ok(self.points.iter().zip(&self.frames).map(|(p, f)| p - f_vec(f, y) * r).collect())
            }
            CurveKind::YCurve { x } => {
                let e = specfun::x0(x)?;
                let r = y_curve_radius(&e);
                Ok(self.points.iter().zip(&self.frames).map(|(p, f)| p - ftilde_vec(f, &e) * r).collect())
            }
            CurveKind::Diagonal => Err(Error::InsufficientResolution("the diagonal curve has no sphere")),
        }
    }

    /// `max_i |A_i - A_0|`.
    pub fn center_drift(&self) -> Result<f64> {
        let a = self.sphere_centers()?;
        Ok(a.iter().map(|c| (c - a[0]).norm()).fold(0.0, f64::max))
    }
}

fn points_from_frames(frames: &[Frame], map: impl Fn(&Frame) -> Point) -> Vec<Point> {
    let base = map(&frames[0]);
    frames.iter().map(|f| map(f) - base).collect()
}

/// The x-curve `y = y0` on `[x_lo, x_hi]` with `n` steps in total, frame
/// `init` and point 0 at `x_lo`.
pub fn build_x_curve_with<C: Connection>(conn: &C, y0: f64, x_range: (f64, f64), n: usize, init: &Frame) -> Result<CurveSample> {
    let (params, frames) = build_line(conn, Axis::X, y0, x_range.0, x_range.1, n)?;
    let g = init * frames[0].transpose();
    let frames: Vec<Frame> = frames.iter().map(|f| g * f).collect();
    let points = points_from_frames(&frames, |f| x_point(f, y0));
    Ok(CurveSample {
        kind: CurveKind::XCurve { y: y0 },
        params,
        points,
        frames,
    })
}

pub fn build_x_curve(y0: f64, x_range: (f64, f64), n: usize, init: &Frame) -> Result<CurveSample> {
    build_x_curve_with(&crate::connection::SurfaceConnection, y0, x_range, n, init)
}

/// The y-curve `x = x0` on `[y_lo, y_hi]`, frame `init` and point 0 at `y_lo`.
pub fn build_y_curve_with<C: Connection>(conn: &C, x0: f64, y_range: (f64, f64), n: usize, init: &Frame) -> Result<CurveSample> {
    let (params, frames) = build_line(conn, Axis::Y, x0, y_range.0, y_range.1, n)?;
    let e = specfun::x0(x0)?;
    let g = init * frames[0].transpose();
    let frames: Vec<Frame> = frames.iter().map(|f| g * f).collect();
    let points = points_from_frames(&frames, |f| y_point(f, &e));
    Ok(CurveSample {
        kind: CurveKind::YCurve { x: x0 },
        params,
        points,
        frames,
    })
}

pub fn build_y_curve(x0: f64, y_range: (f64, f64), n: usize, init: &Frame) -> Result<CurveSample> {
    build_y_curve_with(&crate::connection::SurfaceConnection, x0, y_range, n, init)
}

/// The cuspidal edge along the diagonal together with the staircase corners.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalCurve {
    /// Samples at `(y_i, y_i)`, parametrized by `y_i`.
    pub diagonal: CurveSample,
    /// Samples at the corners `(y_i, y_{i+1})`, parametrized by `y_{i+1}`.
    pub corners: CurveSample,
}

/// Walks `(y_i,y_i) -> (y_i,y_{i+1}) -> (y_{i+1},y_{i+1})` on `[a, b]`, adding
/// the y-curve increment on the vertical edge and the x-curve increment on
/// the horizontal one. Neither edge starts on the diagonal's own degenerate
/// direction.
pub fn build_diagonal_with<C: Connection>(conn: &C, y_range: (f64, f64), n: usize, init: &Frame) -> Result<DiagonalCurve> {
    let (a, b) = y_range;
    if !(0.0 < a && a < b) {
        return Err(domain("y_range", a));
    }
    if n == 0 {
        return Err(Error::InsufficientResolution("n must be at least 1"));
    }
    let ys = nodes_toward(a, b, n);
    let mut f = *init;
    let mut p = Point::zeros();
    let mut diag = CurveSample {
        kind: CurveKind::Diagonal,
        params: alloc::vec![a],
        points: alloc::vec![p],
        frames: alloc::vec![f],
    };
    let mut corners = CurveSample {
        kind: CurveKind::Diagonal,
        params: Vec::with_capacity(n),
        points: Vec::with_capacity(n),
        frames: Vec::with_capacity(n),
    };
    for w in ys.windows(2) {
        let (y0, y1) = (w[0], w[1]);
        let e = specfun::x0(y0)?;
        let g = step_y_coeffs(&f, &conn.coeffs(y0, y0)?, y1 - y0);
        p += y_point(&g, &e) - y_point(&f, &e);
        corners.params.push(y1);
        corners.points.push(p);
        corners.frames.push(g);
        let h = step_x_coeffs(&g, &conn.coeffs(y0, y1)?, y1 - y0);
        p += x_point(&h, y1) - x_point(&g, y1);
        f = h;
        diag.params.push(y1);
        diag.points.push(p);
        diag.frames.push(f);
    }
    Ok(DiagonalCurve { diagonal: diag, corners })
}

pub fn build_diagonal(y_range: (f64, f64), n: usize, init: &Frame) -> Result<DiagonalCurve> {
    build_diagonal_with(&crate::connection::SurfaceConnection, y_range, n, init)
}

/// The y-curve through diagonal sample `i`, on `[y_i - w, y_i + w]` with
/// `m` steps per side, attached rigidly to the diagonal.
pub fn attach_y_curve<C: Connection>(conn: &C, d: &DiagonalCurve, i: usize, w: f64, m: usize) -> Result<CurveSample> {
    let yi = d.diagonal.params[i];
    let mut c = build_y_curve_with(conn, yi, (yi - w, yi + w), 2 * m, &Frame::identity())?;
    let k = c.nearest(yi);
    c.anchor_at(k, &d.diagonal.frames[i], &d.diagonal.points[i]);
    Ok(c)
}

/// The x-curve `y = y_i` on `[y_i - w, y_i + w]` through diagonal sample `i`.
/// Its part with `x > y_i` is the substitute built from the far end toward
/// the diagonal, since stepping forward from `(y_i, y_i)` does not move.
pub fn attach_x_curve<C: Connection>(conn: &C, d: &DiagonalCurve, i: usize, w: f64, m: usize) -> Result<CurveSample> {
    let yi = d.diagonal.params[i];
    let mut c = build_x_curve_with(conn, yi, (yi - w, yi + w), 2 * m, &Frame::identity())?;
    let k = c.nearest(yi);
    c.anchor_at(k, &d.diagonal.frames[i], &d.diagonal.points[i]);
    Ok(c)
}

// ---------------------------------------------------------------------------
// Log-coordinate tracing toward x = 0

/// Frames along `y = y0` at `x_k = x_start exp(-k du)`, `k = 0..=steps`,
/// integrating `dF/du = -x F Omega_1`. Returns the `u` values and frames.
pub fn trace_u<C: Connection>(conn: &C, y0: f64, x_start: f64, du: f64, steps: usize, f0: &Frame) -> Result<(Vec<f64>, Vec<Frame>)> {
    if !(x_start > 0.0) {
        return Err(domain("x", x_start));
    }
    let mut us = Vec::with_capacity(steps + 1);
    let mut fs = Vec::with_capacity(steps + 1);
    let mut f = *f0;
    us.push(0.0);
    fs.push(f);
    for k in 0..steps {
        let u = k as f64 * du;
        let x = x_start * libm::exp(-u);
        let v = star_x(&conn.coeffs(x, y0)?).map(|c| -x * c);
        f = cayley_star_step(&f, X_ALPHA, &v, du);
        us.push((k + 1) as f64 * du);
        fs.push(f);
    }
    Ok((us, fs))
}

// ---------------------------------------------------------------------------
// Cusps

/// Fit window around the cusp, in units of the local step or absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CuspWindow {
    Steps { min: f64, max: f64 },
    Absolute { min: f64, max: f64 },
}

impl Default for CuspWindow {
    fn default() -> Self {
        CuspWindow::Steps { min: 4.0, max: 64.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuspFit {
    pub param: f64,
    /// Leading exponents along the three distinguished directions.
    pub exponents: [f64; 3],
    /// Leading coefficients `|w_i| ~ coeff t^p`.
    pub coefficients: [f64; 3],
    pub frame_at_cusp: Frame,
    pub samples: usize,
}

/// Projects the curve around its singular parameter onto
/// `X_alpha, u2, f` (x-curves) or `X_beta, phi, f~` (y-curves) taken at
/// the cusp and fits `log |w_i|` against `log |t|` on both sides.
pub fn detect_cusp(curve: &CurveSample, window: CuspWindow) -> Result<CuspFit> {
    let (s, dirs): (f64, Box3) = match curve.kind {
        CurveKind::XCurve { y } => (y.abs(), Box3::X(y)),
        CurveKind::YCurve { x } => (0.0, Box3::Y(specfun::x0(x)?)),
        _ => return Err(Error::InsufficientResolution("cusps are located on x- and y-curves only")),
    };
    let c = curve.nearest(s);
    if (curve.params[c] - s).abs() > 1e-12 * (1.0 + s.abs()) {
        return Err(Error::InsufficientResolution("the singular parameter is not a sample"));
    }
    if c == 0 || c + 1 >= curve.len() {
        return Err(Error::InsufficientResolution("the cusp must be an interior sample"));
    }
    let delta = (curve.params[c + 1] - curve.params[c]).max(curve.params[c] - curve.params[c - 1]);
    let (tmin, tmax) = match window {
        CuspWindow::Steps { min, max } => (min * delta, max * delta),
        CuspWindow::Absolute { min, max } => (min, max),
    };
    let f = &curve.frames[c];
    let d = dirs.directions(f);
    let p0 = curve.points[c];
    let mut lt = Vec::new();
    let mut lw: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let (mut left, mut right) = (0usize, 0usize);
    for (k, (q, p)) in curve.params.iter().zip(&curve.points).enumerate() {
        let t = (q - s).abs();
        if k == c || t < tmin * (1.0 - 1e-9) || t > tmax * (1.0 + 1e-9) {
            continue;
        }
        let w: [f64; 3] = core::array::from_fn(|i| d[i].dot(&(p - p0)).abs());
        if w.contains(&0.0) {
            continue;
        }
        if *q < s {
            left += 1;
        } else {
            right += 1;
        }
        lt.push(libm::log(t));
        for i in 0..3 {
            lw[i].push(libm::log(w[i]));
        }
    }
    if left < 3 || right < 3 {
        return Err(Error::InsufficientResolution("fewer than three samples per side in the fit window"));
    }
    let mut exponents = [0.0; 3];
    let mut coefficients = [0.0; 3];
    for i in 0..3 {
        let (slope, icpt) = linear_fit(&lt, &lw[i]);
        exponents[i] = slope;
        coefficients[i] = libm::exp(icpt);
    }
    Ok(CuspFit {
        param: s,
        exponents,
        coefficients,
        frame_at_cusp: *f,
        samples: lt.len(),
    })
}

enum Box3 {
    X(f64),
    Y(X0Eval),
}

impl Box3 {
    fn directions(&self, f: &Frame) -> [Point; 3] {
        match self {
            Box3::X(y) => [col(f, X_ALPHA), u2_vec(f, *y), f_vec(f, *y)],
            Box3::Y(e) => [col(f, X_BETA), col(f, PHI), ftilde_vec(f, e)],
        }
    }
}

/// Speed-based cusp scan: parameters of interior samples where the edge
/// speed has a local minimum below `ratio` times the smaller speed `guard`
/// edges away on either side.
pub fn scan_cusps(curve: &CurveSample, ratio: f64, guard: usize) -> Vec<f64> {
    let m = curve.len();
    if m < 2 * guard + 3 {
        return Vec::new();
    }
    let speed: Vec<f64> = (0..m - 1)
        .map(|k| (curve.points[k + 1] - curve.points[k]).norm() / (curve.params[k + 1] - curve.params[k]).abs())
        .collect();
    let mut out = Vec::new();
    let mut k = guard;
    while k + guard < speed.len() {
        let sk = speed[k];
        if sk <= speed[k - 1] && sk <= speed[k + 1] && sk <= ratio * speed[k - guard].min(speed[k + guard]) {
            // report the node shared with the slower neighbouring edge
            let node = if speed[k - 1] <= speed[k + 1] { k } else { k + 1 };
            out.push(curve.params[node]);
            k += guard;
        } else {
            k += 1;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Reflection to x < 0

/// One sample of the frame field with its surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub frame: Frame,
    pub point: Point,
}

/// The back side on `x < 0`: `F(-x, y) := F(x, y)`, `f(-x, y) := f(x, y)`.
pub fn reflect_to_dminus(samples: &[FieldSample]) -> Vec<FieldSample> {
    samples.iter().map(|s| FieldSample { x: -s.x, ..*s }).collect()
}

/// `B = diag(-1, 1, 1, 1)`.
pub fn reflection_b() -> Frame {
    Frame::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0))
}

/// `max |B f(x, -y) - f(x, y)|` over the samples of a y-curve whose
/// parameters are symmetric about 0, after normalizing at `y = 0`.
pub fn reflection_residual(curve: &CurveSample) -> Result<f64> {
    let CurveKind::YCurve { .. } = curve.kind else {
        return Err(Error::InsufficientResolution("reflection applies to y-curves"));
    };
    let z = curve.nearest(0.0);
    if curve.params[z] != 0.0 {
        return Err(Error::InsufficientResolution("y = 0 is not a sample"));
    }
    let mut c = curve.clone();
    c.renormalize_at(z);
    let b = reflection_b();
    let m = c.len();
    let mut worst: f64 = 0.0;
    let mut k = 0;
    while z >= k && z + k < m {
        let lo = z - k;
        let hi = z + k;
        if (c.params[lo] + c.params[hi]).abs() > 1e-12 * (1.0 + c.params[hi].abs()) {
            return Err(Error::InsufficientResolution("samples are not symmetric about y = 0"));
        }
        worst = worst.max((b * c.points[lo] - c.points[hi]).norm());
        k += 1;
    }
    Ok(worst)
}
