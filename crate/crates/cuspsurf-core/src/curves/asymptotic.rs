//! Limits of the frame and of the curves as `x -> 0`, `x -> infinity` and
//! `|y| -> infinity`.

use alloc::vec::Vec;

use nalgebra::{Matrix3, SMatrix, Vector4};

use super::{
    build_line, f_vec, fit_circle, fit_rotating_pair, linear_fit, n_vec, nodes_toward, pca, trace_u, trace_x, u_vec,
    unwrapped_angles, utilde_vec, x_curve_radius, x_point, y_curve_radius, y_point, CircleFit, CurveKind, CurveSample,
    Point,
};
use crate::connection::{omega1_matrix, Connection};
use crate::error::{domain, Error, Result};
use crate::integrator::{Axis, Frame, XI, X_ALPHA};
use crate::quad;
use crate::specfun::{self, SQRT5};

type M43 = SMatrix<f64, 4, 3>;

/// Frame coordinates of `X_alpha`, `f` and `u2` at height `y`.
fn m_basis(y: f64) -> M43 {
    let s = 1.0 + y * y;
    let q = 5.0 + 4.0 * y * y;
    let nf = 1.0 / libm::sqrt(s * q);
    let nu = 1.0 / libm::sqrt(q);
    M43::from_columns(&[
        Vector4::new(0.0, 1.0, 0.0, 0.0),
        Vector4::new(y * nf, 0.0, nf, -2.0 * s * nf),
        Vector4::new(2.0 * y * nu, 0.0, 2.0 * nu, nu),
    ])
}

/// The limiting generator `V0(y)` of `dM/du = M V`.
pub fn v0_generator(y: f64) -> Matrix3<f64> {
    let v2 = specfun::v2_at_origin(y);
    let v3 = specfun::v3_at_origin(y);
    Matrix3::new(0.0, -v3, v2, v3, 0.0, 0.0, -v2, 0.0, 0.0)
}

/// `exp(a K)` for a skew `K` with `K^3 = -K`.
fn rodrigues(k: &Matrix3<f64>, a: f64) -> Matrix3<f64> {
    Matrix3::identity() + k * libm::sin(a) + k * k * (1.0 - libm::cos(a))
}

fn ceil_steps(len: f64, step: f64) -> usize {
    (libm::ceil(len.abs() / step) as usize).max(1)
}

/// Frame at `(x, y)` reached from `init` at `(x_ref, 0)` by walking along
/// `y = 0` and then along `x`.
fn frame_via_axis<C: Connection>(conn: &C, init: &Frame, x_ref: f64, x: f64, y: f64, step: f64) -> Result<Frame> {
    let mut f = *init;
    if x != x_ref {
        let xs = nodes_toward(x_ref, x, ceil_steps(x - x_ref, step));
        f = *trace_x(conn, 0.0, &xs, &f)?.last().unwrap();
    }
    if y != 0.0 {
        let ys = nodes_toward(0.0, y, ceil_steps(y, step));
        f = *super::trace_y(conn, x, &ys, &f)?.last().unwrap();
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// x -> 0

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UAnalysisConfig {
    /// `x` at `u = 0`; the field is anchored at `(x_start, 0)`.
    pub x_start: f64,
    pub u_max: f64,
    pub steps: usize,
    /// Step of the walk from `(x_start, 0)` to `(x_start, y)`.
    pub y_step: f64,
    /// Start of the one-period window used for the circle `Gamma(u, y)`.
    pub gamma_from: f64,
    /// Upper bound for `|Mbar(u) - N_inf| / x^2` on the second half.
    pub decay_limit: f64,
}

impl Default for UAnalysisConfig {
    fn default() -> Self {
        UAnalysisConfig {
            x_start: 1.0,
            u_max: 16.0,
            steps: 3200,
            y_step: 1e-3,
            gamma_from: 10.0,
            decay_limit: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UCurveReport {
    pub y: f64,
    /// Points `f(e^-u, y)` with `A(y) = 0`.
    pub curve: CurveSample,
    /// Fitted angular speed of `X_alpha` in `u` over the last quarter.
    pub angular_speed: f64,
    /// `2 atan(du |v0|/2)/du`, the rate of the discrete rotation.
    pub discrete_speed: f64,
    pub v0_norm: f64,
    /// `|V(x_end) - V0|` with `V` read off the step generator.
    pub v0_generator_residual: f64,
    pub n_inf: SMatrix<f64, 4, 3>,
    /// `max |Mbar(u) - N_inf| / x^2` over the second half of the range.
    pub n_inf_decay: f64,
    pub b_inf: Point,
    pub c_inf: Point,
    /// Largest misfit of `X_alpha ~ cos(su) b_inf - sin(su) c_inf`.
    pub phase_fit_residual: f64,
    /// Distance between the fitted `b_inf, c_inf` and those read off `N_inf`.
    pub unwinding_consistency: f64,
    pub v1: Point,
    pub gamma_radius: f64,
    pub gamma_radius_expected: f64,
    pub gamma_diameter: f64,
    pub gamma_center: Point,
    pub gamma_center_expected: Point,
}

/// Integrates along `x = x_start e^-u` at height `y` from the frame `f0`.
pub fn u_curve_report<C: Connection>(conn: &C, y: f64, cfg: &UAnalysisConfig, f0: &Frame) -> Result<UCurveReport> {
    if !(cfg.u_max >= 5.0) || cfg.steps < 8 {
        return Err(domain("u_max", cfg.u_max));
    }
    let du = cfg.u_max / cfg.steps as f64;
    let (us, frames) = trace_u(conn, y, cfg.x_start, du, cfg.steps, f0)?;
    let m = frames.len();
    let xs: Vec<f64> = us.iter().map(|u| cfg.x_start * libm::exp(-u)).collect();
    let basis = m_basis(y);
    let v0 = v0_generator(y);
    let (v2, v3) = (specfun::v2_at_origin(y), specfun::v3_at_origin(y));
    let omega = libm::sqrt(v2 * v2 + v3 * v3);
    let rate = 2.0 * libm::atan(0.5 * du * omega) / du;
    let k = v0 / omega;

    let x_end = xs[m - 1];
    let w = -(omega1_matrix(&conn.coeffs(x_end, y)?) * x_end);
    let v_end = basis.transpose() * w * basis;
    let v0_generator_residual = (v_end - v0).amax();

    let mbar: Vec<M43> = frames
        .iter()
        .zip(&us)
        .map(|(f, u)| f * basis * rodrigues(&k, -rate * u))
        .collect();
    let n_inf = mbar[m - 1];
    let mut n_inf_decay: f64 = 0.0;
    for i in m / 2..m - 1 {
        n_inf_decay = n_inf_decay.max((mbar[i] - n_inf).amax() / (xs[i] * xs[i]));
    }
    if !(n_inf_decay <= cfg.decay_limit) {
        return Err(Error::NonConvergence("M does not settle to its limit like x^2"));
    }

    let a_inf: Point = n_inf.column(1).into_owned();
    let cn: Point = n_inf.column(2).into_owned();
    let b_from_n: Point = n_inf.column(0).into_owned();
    let c_from_n: Point = -(a_inf * v3 - cn * v2) / omega;
    let v0vec = a_inf * v2 + cn * v3;
    let v1 = -v0vec * (2.0 / SQRT5);

    let q0 = 3 * m / 4;
    let xa: Vec<Point> = frames[q0..].iter().map(|f| f.column(X_ALPHA).into_owned()).collect();
    let uq = &us[q0..];
    let plane = pca(&xa)?;
    let angles = unwrapped_angles(&xa, &[plane.axes[0], plane.axes[1]]);
    let angular_speed = linear_fit(uq, &angles).0.abs();
    let phases: Vec<f64> = uq.iter().map(|u| rate * u).collect();
    let (p, q, phase_fit_residual) = fit_rotating_pair(&phases, &xa)?;
    let b_inf = p;
    let c_inf = -q;
    let unwinding_consistency = (b_inf - b_from_n).norm().max((c_inf - c_from_n).norm());

    let points: Vec<Point> = frames.iter().map(|f| x_point(f, y)).collect();
    let period = 2.0 * core::f64::consts::PI / rate;
    if cfg.gamma_from + period > cfg.u_max + 1e-12 {
        return Err(Error::InsufficientResolution("u_max does not cover one period past gamma_from"));
    }
    let g: Vec<Point> = us
        .iter()
        .zip(&points)
        .filter(|(u, _)| **u >= cfg.gamma_from && **u <= cfg.gamma_from + period)
        .map(|(_, p)| *p)
        .collect();
    let mut gamma_diameter: f64 = 0.0;
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            gamma_diameter = gamma_diameter.max((g[i] - g[j]).norm());
        }
    }
    let h0 = 5.0 + SQRT5 + 2.0 * y * y;
    let gamma_radius_expected = 2.0 * y * y / (SQRT5 * h0);
    let gamma_center_expected = -v1 * (x_curve_radius(y) * 2.0 * v2 / SQRT5);
    let (gamma_radius, gamma_center) = if gamma_diameter > 1e-6 {
        let c = fit_circle(&g)?;
        (c.radius, c.center)
    } else {
        let mean = g.iter().fold(Point::zeros(), |a, p| a + p) / g.len() as f64;
        (0.5 * gamma_diameter, mean)
    };

    Ok(UCurveReport {
        y,
        curve: CurveSample {
            kind: CurveKind::UCurve { y },
            params: us,
            points,
            frames,
        },
        angular_speed,
        discrete_speed: rate,
        v0_norm: v0vec.norm(),
        v0_generator_residual,
        n_inf,
        n_inf_decay,
        b_inf,
        c_inf,
        phase_fit_residual,
        unwinding_consistency,
        v1,
        gamma_radius,
        gamma_radius_expected,
        gamma_diameter,
        gamma_center,
        gamma_center_expected,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UReport {
    pub curves: Vec<UCurveReport>,
    /// `b_inf`, `c_inf` of the first curve.
    pub b_inf: Point,
    pub c_inf: Point,
    /// Largest distance of another curve's `b_inf`/`c_inf` from the first.
    pub spread: f64,
}

/// Runs [`u_curve_report`] for each `y`, all in the frame field anchored
/// with `init` at `(x_start, 0)`.
pub fn asymptotic_u_analysis_with<C: Connection>(conn: &C, ys: &[f64], cfg: &UAnalysisConfig, init: &Frame) -> Result<UReport> {
    if ys.is_empty() {
        return Err(Error::InsufficientResolution("no y values"));
    }
    let mut curves = Vec::with_capacity(ys.len());
    for &y in ys {
        let f0 = frame_via_axis(conn, init, cfg.x_start, cfg.x_start, y, cfg.y_step)?;
        curves.push(u_curve_report(conn, y, cfg, &f0)?);
    }
    let b_inf = curves[0].b_inf;
    let c_inf = curves[0].c_inf;
    let spread = curves
        .iter()
        .map(|c| (c.b_inf - b_inf).norm().max((c.c_inf - c_inf).norm()))
        .fold(0.0, f64::max);
    Ok(UReport {
        curves,
        b_inf,
        c_inf,
        spread,
    })
}

pub fn asymptotic_u_analysis(ys: &[f64], cfg: &UAnalysisConfig) -> Result<UReport> {
    asymptotic_u_analysis_with(&crate::connection::SurfaceConnection, ys, cfg, &Frame::identity())
}

// ---------------------------------------------------------------------------
// |y| -> infinity

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YAnalysisConfig {
    /// The field is anchored at `(x_ref, 0)`.
    pub x_ref: f64,
    pub x_step: f64,
    pub y_max: f64,
    /// Steps per y-line over `[-y_max, y_max]`.
    pub n: usize,
    /// Number of y samples per line for the orthogonality check.
    pub grid: usize,
    /// Half width of the y-range used for the plane of `A(y)`.
    pub plane_half_width: f64,
}

impl Default for YAnalysisConfig {
    fn default() -> Self {
        YAnalysisConfig {
            x_ref: 1.0,
            x_step: 1e-3,
            y_max: 50.0,
            n: 100_000,
            grid: 10,
            plane_half_width: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct YLineReport {
    pub x: f64,
    pub radius: f64,
    pub center_drift: f64,
    /// `|f(x, Y) - f(x, -Y)|` for `Y = y_max, y_max/2, y_max/4`.
    pub gaps: [f64; 3],
    pub v1_tilde: Point,
    /// Largest distance of `f(x, +-y_max)` from `r~ v1~ + A~`.
    pub limit_distance: f64,
    /// `max | |du/dy| - y^2/(1+y^2) |` over the line.
    pub du_dy_residual: f64,
    /// `| |du~/dx| - T(x) |`.
    pub utilde_speed_residual: f64,
    pub reflection_residual: f64,
    /// The line, with `A~(x) = 0`.
    pub curve: CurveSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YReport {
    pub lines: Vec<YLineReport>,
    pub b_tilde_inf: Point,
    pub c_tilde_inf: Point,
    /// Largest misfit of `u(y) = -sin(y - atan y) b~ + cos(y - atan y) c~`.
    pub u_fit_residual: f64,
    /// `max |<u(y), u~(x)>|` over the sampled grid, both read at `(x, y)`.
    pub orthogonality: f64,
    /// The same with `u(y)` read on the first line and `u~(x)` at `(x, 0)`.
    pub orthogonality_cross: f64,
    /// Distance of `A(y) - A(0)` from the plane of `b~, c~` for `|y| <= plane_half_width`.
    pub a_planarity: f64,
}

fn y_line<C: Connection>(conn: &C, x: f64, cfg: &YAnalysisConfig, f_axis: &Frame) -> Result<YLineReport> {
    let (params, frames) = build_line(conn, Axis::Y, x, -cfg.y_max, cfg.y_max, cfg.n)?;
    let e = specfun::x0(x)?;
    let mut curve = CurveSample {
        kind: CurveKind::YCurve { x },
        params,
        points: frames.iter().map(|f| y_point(f, &e)).collect(),
        frames,
    };
    let z = curve.nearest(0.0);
    let g = f_axis * curve.frames[z].transpose();
    curve.apply_rigid(&g, &Point::zeros());

    let cs = conn.coeffs_on_vertical(x, &curve.params)?;
    let mut du_dy_residual: f64 = 0.0;
    for ((f, y), c) in curve.frames.iter().zip(&curve.params).zip(&cs) {
        let d = super::du_dy(f, *y, c).norm() - y * y / (1.0 + y * y);
        du_dy_residual = du_dy_residual.max(d.abs());
    }
    let t = specfun::t_from(&e)?;
    let dut = super::dutilde_dx(&curve.frames[z], &e, &cs[z]);
    let utilde_speed_residual = (dut.norm() - t).abs();
    let v1_tilde = dut / t;
    let radius = y_curve_radius(&e);
    let limit = v1_tilde * radius;
    let last = curve.len() - 1;
    let limit_distance = (curve.points[0] - limit).norm().max((curve.points[last] - limit).norm());
    let gap_at = |yy: f64| (curve.points[curve.nearest(yy)] - curve.points[curve.nearest(-yy)]).norm();
    let gaps = [gap_at(cfg.y_max), gap_at(0.5 * cfg.y_max), gap_at(0.25 * cfg.y_max)];
    Ok(YLineReport {
        x,
        radius,
        center_drift: curve.center_drift()?,
        gaps,
        v1_tilde,
        limit_distance,
        du_dy_residual,
        utilde_speed_residual,
        reflection_residual: super::reflection_residual(&curve)?,
        curve,
    })
}

/// y-lines at each `x`, in the frame field anchored with `init` at `(x_ref, 0)`.
pub fn asymptotic_y_analysis_with<C: Connection>(conn: &C, xs: &[f64], cfg: &YAnalysisConfig, init: &Frame) -> Result<YReport> {
    if xs.is_empty() {
        return Err(Error::InsufficientResolution("no x values"));
    }
    if !(cfg.y_max >= 1.0) || cfg.n < 2 || cfg.grid < 1 {
        return Err(domain("y_max", cfg.y_max));
    }
    let mut lines = Vec::with_capacity(xs.len());
    let mut axis_frames = Vec::with_capacity(xs.len());
    for &x in xs {
        let fa = frame_via_axis(conn, init, cfg.x_ref, x, 0.0, cfg.x_step)?;
        axis_frames.push(fa);
        lines.push(y_line(conn, x, cfg, &fa)?);
    }

    let first = &lines[0].curve;
    let stride = (first.len() / 20_000).max(1);
    let mut psi = Vec::new();
    let mut uu = Vec::new();
    for k in (0..first.len()).step_by(stride) {
        let y = first.params[k];
        psi.push(y - libm::atan(y));
        uu.push(u_vec(&first.frames[k], y));
    }
    let (p, q, u_fit_residual) = fit_rotating_pair(&psi, &uu)?;
    let c_tilde_inf = p;
    let b_tilde_inf = -q;

    let mut orthogonality: f64 = 0.0;
    let mut orthogonality_cross: f64 = 0.0;
    for (line, fa) in lines.iter().zip(&axis_frames) {
        let e = specfun::x0(line.x)?;
        let ut_axis = utilde_vec(fa, &e);
        let m = line.curve.len();
        for g in 0..cfg.grid {
            let k = if cfg.grid == 1 { m / 2 } else { g * (m - 1) / (cfg.grid - 1) };
            let f = &line.curve.frames[k];
            let y = line.curve.params[k];
            orthogonality = orthogonality.max(u_vec(f, y).dot(&utilde_vec(f, &e)).abs());
            let j = first.nearest(y);
            orthogonality_cross = orthogonality_cross.max(u_vec(&first.frames[j], first.params[j]).dot(&ut_axis).abs());
        }
    }

    let e1 = b_tilde_inf.normalize();
    let e2 = (c_tilde_inf - e1 * e1.dot(&c_tilde_inf)).normalize();
    let z = first.nearest(0.0);
    let a_of = |k: usize| first.points[k] - f_vec(&first.frames[k], first.params[k]) * x_curve_radius(first.params[k]);
    let a0 = a_of(z);
    let mut a_planarity: f64 = 0.0;
    for k in 0..first.len() {
        if first.params[k].abs() <= cfg.plane_half_width {
            let d = a_of(k) - a0;
            let r = d - e1 * e1.dot(&d) - e2 * e2.dot(&d);
            a_planarity = a_planarity.max(r.norm());
        }
    }

    Ok(YReport {
        lines,
        b_tilde_inf,
        c_tilde_inf,
        u_fit_residual,
        orthogonality,
        orthogonality_cross,
        a_planarity,
    })
}

pub fn asymptotic_y_analysis(xs: &[f64], cfg: &YAnalysisConfig) -> Result<YReport> {
    asymptotic_y_analysis_with(&crate::connection::SurfaceConnection, xs, cfg, &Frame::identity())
}

/// The four limit vectors, from analyses run in the same field.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticCircles {
    pub b_inf: Point,
    pub c_inf: Point,
    pub b_tilde_inf: Point,
    pub c_tilde_inf: Point,
    pub fitted_angular_speed: f64,
}

impl AsymptoticCircles {
    pub fn from_reports(u: &UReport, y: &YReport) -> Self {
        let speed = u.curves.iter().map(|c| c.angular_speed).sum::<f64>() / u.curves.len() as f64;
        AsymptoticCircles {
            b_inf: u.b_inf,
            c_inf: u.c_inf,
            b_tilde_inf: y.b_tilde_inf,
            c_tilde_inf: y.c_tilde_inf,
            fitted_angular_speed: speed,
        }
    }

    /// `max |G^T G - I|` for `G = [b, c, b~, c~]`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = Frame::from_columns(&[self.b_inf, self.c_inf, self.b_tilde_inf, self.c_tilde_inf]);
        crate::integrator::orthogonality_defect(&g)
    }
}

// ---------------------------------------------------------------------------
// x -> infinity

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XAnalysisConfig {
    pub x_start: f64,
    pub x_max: f64,
    /// Steps on `[x_start, x_max]`.
    pub n: usize,
    pub u: UAnalysisConfig,
    /// Left end of the window for the phase of `xi`.
    pub phase_from: f64,
    /// Spacing of the samples used in fits.
    pub sample_every: f64,
    /// Left end of the window for the large-x circle, as a fraction of `x_max`.
    pub far_circle_from: f64,
    pub residual_from: f64,
}

impl Default for XAnalysisConfig {
    fn default() -> Self {
        XAnalysisConfig {
            x_start: 1.0,
            x_max: 100.0,
            n: 400_000,
            u: UAnalysisConfig::default(),
            phase_from: 20.0,
            sample_every: 0.05,
            far_circle_from: 0.5,
            residual_from: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XReport {
    pub y: f64,
    /// `v1(y)` from the small-x limit.
    pub v1: Point,
    /// `v1(y) = (1+y^2)/y^2 du/dy` at `x_start`, for `y != 0`.
    pub v1_structure: Option<Point>,
    /// `(x, x |v1 + n(x, y)|)` at the sample points.
    pub scaled_residual: Vec<(f64, f64)>,
    pub max_scaled_residual: f64,
    /// RMS of the phase of `xi` against `+-w(x)` plus a constant.
    pub xi_phase_rms: f64,
    pub far_circle: CircleFit,
    pub far_radius_expected: f64,
    pub far_center_expected: Point,
    pub near: UCurveReport,
    /// Largest distance of the two circle centers from the line `t v1`.
    pub collinearity: f64,
}

pub fn asymptotic_x_analysis_with<C: Connection>(conn: &C, y: f64, cfg: &XAnalysisConfig, init: &Frame) -> Result<XReport> {
    if !(cfg.x_max >= 50.0) || !(cfg.x_start > 0.0) || cfg.n < 1 {
        return Err(domain("x_max", cfg.x_max));
    }
    let mut ucfg = cfg.u;
    ucfg.x_start = cfg.x_start;
    let near = u_curve_report(conn, y, &ucfg, init)?;
    let v1 = near.v1;
    let c0 = conn.coeffs(cfg.x_start, y)?;
    let v1_structure = if y != 0.0 {
        Some(super::du_dy(init, y, &c0) * ((1.0 + y * y) / (y * y)))
    } else {
        None
    };

    let xs = nodes_toward(cfg.x_start, cfg.x_max, cfg.n);
    let frames = trace_x(conn, y, &xs, init)?;
    let every = libm::ceil(cfg.sample_every / ((cfg.x_max - cfg.x_start) / cfg.n as f64)).max(1.0) as usize;
    let idx: Vec<usize> = (0..xs.len()).step_by(every).collect();

    let mut scaled_residual = Vec::new();
    for &k in &idx {
        if xs[k] >= cfg.residual_from {
            scaled_residual.push((xs[k], xs[k] * (v1 + n_vec(&frames[k], y)).norm()));
        }
    }
    let max_scaled_residual = scaled_residual.iter().map(|p| p.1).fold(0.0, f64::max);

    let ph: Vec<usize> = idx.iter().copied().filter(|&k| xs[k] >= cfg.phase_from).collect();
    if ph.len() < 8 {
        return Err(Error::InsufficientResolution("too few samples for the phase of xi"));
    }
    let xis: Vec<Point> = ph.iter().map(|&k| frames[k].column(XI).into_owned()).collect();
    let plane = pca(&xis)?;
    let theta = unwrapped_angles(&xis, &[plane.axes[0], plane.axes[1]]);
    let mut wv = Vec::with_capacity(ph.len());
    let mut acc = specfun::w(xs[ph[0]])?;
    wv.push(acc);
    for p in ph.windows(2) {
        let q = quad::integrate(
            |s| {
                let e = specfun::x0(s)?;
                Ok(s / (2.0 * e.value - s * e.d1))
            },
            xs[p[0]],
            xs[p[1]],
            1e-12,
        )?;
        acc += SQRT5 * q.value;
        wv.push(acc);
    }
    let rms_for = |sign: f64| {
        let d: Vec<f64> = theta.iter().zip(&wv).map(|(t, w)| t - sign * w).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        libm::sqrt(d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d.len() as f64)
    };
    let xi_phase_rms = rms_for(1.0).min(rms_for(-1.0));

    let far: Vec<Point> = idx
        .iter()
        .filter(|&&k| xs[k] >= cfg.far_circle_from * cfg.x_max)
        .map(|&k| x_point(&frames[k], y))
        .collect();
    let far_circle = fit_circle(&far)?;
    let far_radius_expected = 1.0 / SQRT5;
    let far_center_expected = -v1 / (2.0 * SQRT5 * libm::sqrt(1.0 + y * y));

    let dir = v1.normalize();
    let off_line = |c: &Point| (c - dir * dir.dot(c)).norm();
    let collinearity = off_line(&far_circle.center).max(off_line(&near.gamma_center));

    Ok(XReport {
        y,
        v1,
        v1_structure,
        scaled_residual,
        max_scaled_residual,
        xi_phase_rms,
        far_circle,
        far_radius_expected,
        far_center_expected,
        near,
        collinearity,
    })
}

pub fn asymptotic_x_analysis(y: f64, cfg: &XAnalysisConfig) -> Result<XReport> {
    asymptotic_x_analysis_with(&crate::connection::SurfaceConnection, y, cfg, &Frame::identity())
}

/// `f(0, 0) = -(1/2) v1(0) + A(0)` in the field anchored with `init` at
/// `(x_start, 0)`, and the largest distance to `f(x, y)` over points at
/// distance `radius` from the origin with `x > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginReport {
    pub f00: Point,
    pub max_gap: f64,
}

pub fn origin_limit<C: Connection>(conn: &C, cfg: &UAnalysisConfig, init: &Frame, radius: f64, samples: usize) -> Result<OriginReport> {
    let near = u_curve_report(conn, 0.0, cfg, init)?;
    let f00 = -near.v1 * 0.5;
    let mut max_gap: f64 = 0.0;
    for s in 0..samples {
        let ang = -0.45 * core::f64::consts::PI + 0.9 * core::f64::consts::PI * (s as f64 + 0.5) / samples as f64;
        let x = radius * libm::cos(ang);
        let y = radius * libm::sin(ang);
        let u = libm::log(cfg.x_start / x);
        let steps = (libm::ceil(u / (cfg.u_max / cfg.steps as f64)) as usize).max(1);
        let (_, fs) = trace_u(conn, 0.0, cfg.x_start, u / steps as f64, steps, init)?;
        let fx = fs[steps];
        let ys = nodes_toward(0.0, y, 64);
        let fxy = *super::trace_y(conn, x, &ys, &fx)?.last().unwrap();
        let e = specfun::x0(x)?;
        // point at (x, 0) from the x-curve map, then the y-curve increment
        let p = x_point(&fx, 0.0) + y_point(&fxy, &e) - y_point(&fx, &e);
        max_gap = max_gap.max((p - f00).norm());
    }
    Ok(OriginReport { f00, max_gap })
}
