//! The flat connection of the frame field `F = [phi, X_alpha, X_beta, xi]`:
//! `dF = F (Omega1 dx + Omega2 dy)` with
//!
//! ```text
//! Omega1 = [  0   a1   0   0 ]      Omega2 = [  0    0   a2   0 ]
//!          [ -a1   0  c1  b1 ]               [  0    0  -c2   0 ]
//!          [  0  -c1   0   0 ]               [ -a2  c2   0   b2 ]
//!          [  0  -b1   0   0 ]               [  0    0  -b2   0 ]
//! ```

use alloc::vec::Vec;

use nalgebra::Matrix4;

use crate::error::{domain, Result};
use crate::specfun::{self, X0Eval, SQRT5};

/// The six connection coefficients at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConnCoeffs {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}

impl ConnCoeffs {
    pub fn nu1_sq(&self) -> f64 {
        self.a1 * self.a1 + self.b1 * self.b1 + self.c1 * self.c1
    }

    pub fn nu2_sq(&self) -> f64 {
        self.a2 * self.a2 + self.b2 * self.b2 + self.c2 * self.c2
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a1, self.b1, self.c1, self.a2, self.b2, self.c2]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        ConnCoeffs {
            a1: v[0],
            b1: v[1],
            c1: v[2],
            a2: v[3],
            b2: v[4],
            c2: v[5],
        }
    }

    fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let (p, q) = (self.as_array(), other.as_array());
        let mut out = [0.0; 6];
        for i in 0..6 {
            out[i] = f(p[i], q[i]);
        }
        Self::from_array(out)
    }
}

/// A source of connection coefficients on (part of) the plane.
pub trait Connection {
    fn coeffs(&self, x: f64, y: f64) -> Result<ConnCoeffs>;

    /// Coefficients at `(x, y)` for every `y` in `ys`.
    fn coeffs_on_vertical(&self, x: f64, ys: &[f64]) -> Result<Vec<ConnCoeffs>> {
        ys.iter().map(|y| self.coeffs(x, *y)).collect()
    }
}

/// The connection of the curvature surface built from `X0`, defined on `x > 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SurfaceConnection;

impl Connection for SurfaceConnection {
    fn coeffs(&self, x: f64, y: f64) -> Result<ConnCoeffs> {
        conn_coeffs(x, y)
    }

    fn coeffs_on_vertical(&self, x: f64, ys: &[f64]) -> Result<Vec<ConnCoeffs>> {
        if !(x > 0.0) {
            return Err(domain("x", x));
        }
        let e = specfun::x0(x)?;
        ys.iter()
            .map(|y| if y.is_finite() { Ok(conn_coeffs_from(&e, *y)) } else { Err(domain("y", *y)) })
            .collect()
    }
}

/// A connection with constant coefficients; useful as a test fixture.
#[derive(Debug, Clone, Copy)]
pub struct ConstantConnection(pub ConnCoeffs);

impl Connection for ConstantConnection {
    fn coeffs(&self, _x: f64, _y: f64) -> Result<ConnCoeffs> {
        Ok(self.0)
    }
}

pub fn conn_coeffs(x: f64, y: f64) -> Result<ConnCoeffs> {
    if !(x > 0.0) {
        return Err(domain("x", x));
    }
    if !y.is_finite() {
        return Err(domain("y", y));
    }
    Ok(conn_coeffs_from(&specfun::x0(x)?, y))
}

pub fn conn_coeffs_from(e: &X0Eval, y: f64) -> ConnCoeffs {
    let x = e.x;
    let h = specfun::h_from(e, y);
    let p = e.value + 0.5 * SQRT5;
    let xh = x * h;
    let d = e.d1_over_x;
    ConnCoeffs {
        a1: 2.0 * y * p / xh,
        b1: -(p + SQRT5 * (x * x - y * y)) / xh,
        c1: -2.0 * p / xh,
        a2: -(2.0 * e.value + SQRT5 - (x * x + y * y) * d) / h,
        b2: -2.0 * y * (0.5 * d + SQRT5) / h,
        c2: 2.0 * y * e.d2_minus_d1_over_x / h,
    }
}

/// The two connection matrices at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaPair {
    pub omega1: Matrix4<f64>,
    pub omega2: Matrix4<f64>,
}

pub fn omega1_matrix(c: &ConnCoeffs) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(0, 1)] = c.a1;
    m[(1, 0)] = -c.a1;
    m[(1, 2)] = c.c1;
    m[(2, 1)] = -c.c1;
    m[(1, 3)] = c.b1;
    m[(3, 1)] = -c.b1;
    m
}

pub fn omega2_matrix(c: &ConnCoeffs) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(0, 2)] = c.a2;
    m[(2, 0)] = -c.a2;
    m[(1, 2)] = -c.c2;
    m[(2, 1)] = c.c2;
    m[(2, 3)] = c.b2;
    m[(3, 2)] = -c.b2;
    m
}

pub fn omega_from(c: &ConnCoeffs) -> OmegaPair {
    OmegaPair {
        omega1: omega1_matrix(c),
        omega2: omega2_matrix(c),
    }
}

pub fn omega(x: f64, y: f64) -> Result<OmegaPair> {
    Ok(omega_from(&conn_coeffs(x, y)?))
}

/// Densities of the coframe: `df = theta1 X_alpha + theta2 X_beta` with
/// `theta1 = theta1_density dx`, `theta2 = theta2_density dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepWeights {
    pub theta1_density: f64,
    pub theta2_density: f64,
}

pub fn step_weights_from(e: &X0Eval, y: f64) -> StepWeights {
    let x = e.x;
    let h = specfun::h_from(e, y);
    StepWeights {
        theta1_density: (x * x - y * y) / (x * h),
        theta2_density: 2.0 * y / h,
    }
}

pub fn step_weights(x: f64, y: f64) -> Result<StepWeights> {
    if x == 0.0 || !x.is_finite() {
        return Err(domain("x", x));
    }
    Ok(step_weights_from(&specfun::x0(x)?, y))
}

/// The angle function and its z-derivative on the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiPair {
    pub cos_phi: f64,
    pub sin_phi: f64,
    pub phi_z: f64,
    /// The angle itself, in `(-pi, pi)` for `x > 0` and odd under `x -> -x`.
    pub phi_branch: f64,
}

pub fn phi_pair(x: f64, y: f64) -> Result<PhiPair> {
    if x == 0.0 || !x.is_finite() || !y.is_finite() {
        return Err(domain("x", x));
    }
    let r2 = x * x + y * y;
    let c = (x * x - y * y) / r2;
    let s = 2.0 * x * y / r2;
    let ax = x.abs();
    let branch = libm::atan2(2.0 * ax * y / r2, c);
    Ok(PhiPair {
        cos_phi: c,
        sin_phi: s,
        phi_z: y / r2,
        phi_branch: if x > 0.0 { branch } else { -branch },
    })
}

/// First partial derivatives of the six coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffPartials {
    pub dx: ConnCoeffs,
    pub dy: ConnCoeffs,
}

/// Closed-form partial derivatives of the coefficients.
pub fn coeff_partials_analytic(x: f64, y: f64) -> Result<CoeffPartials> {
    if !(x > 0.0) {
        return Err(domain("x", x));
    }
    let e = specfun::x0(x)?;
    let xv = e.value;
    let x1 = e.d1;
    let x2 = e.d2;
    let x3 = e.d3;
    let d = e.d1_over_x;
    let c = e.d2_minus_d1_over_x;
    let d_x = c / x;
    let c_x = x3 - c / x;
    let p = xv + 0.5 * SQRT5;
    let h = specfun::h_from(&e, y);
    let h_x = x1 - x * x2 + y * y * d_x;
    let h_y = 2.0 * y * d;
    let xh = x * h;
    let xh_x = h + x * h_x;
    let xh_y = x * h_y;

    // f = n/(xh)
    let over_xh = |n: f64, n_x: f64, n_y: f64| -> (f64, f64) {
        (
            n_x / xh - n * xh_x / (xh * xh),
            n_y / xh - n * xh_y / (xh * xh),
        )
    };
    // g = m/h
    let over_h = |m: f64, m_x: f64, m_y: f64| -> (f64, f64) {
        (m_x / h - m * h_x / (h * h), m_y / h - m * h_y / (h * h))
    };

    let a1 = over_xh(2.0 * y * p, 2.0 * y * x1, 2.0 * p);
    let b1 = over_xh(
        -(p + SQRT5 * (x * x - y * y)),
        -(x1 + 2.0 * SQRT5 * x),
        2.0 * SQRT5 * y,
    );
    let c1 = over_xh(-2.0 * p, -2.0 * x1, 0.0);
    let r2 = x * x + y * y;
    let a2 = over_h(
        -(2.0 * xv + SQRT5 - r2 * d),
        -(2.0 * x1 - 2.0 * x * d - r2 * d_x),
        2.0 * y * d,
    );
    let b2 = over_h(-2.0 * y * (0.5 * d + SQRT5), -y * d_x, -2.0 * (0.5 * d + SQRT5));
    let c2 = over_h(2.0 * y * c, 2.0 * y * c_x, 2.0 * c);
    Ok(CoeffPartials {
        dx: ConnCoeffs::from_array([a1.0, b1.0, c1.0, a2.0, b2.0, c2.0]),
        dy: ConnCoeffs::from_array([a1.1, b1.1, c1.1, a2.1, b2.1, c2.1]),
    })
}

fn central<C: Connection>(conn: &C, x: f64, y: f64, h: f64, along_x: bool) -> Result<ConnCoeffs> {
    let (p, m) = if along_x {
        (conn.coeffs(x + h, y)?, conn.coeffs(x - h, y)?)
    } else {
        (conn.coeffs(x, y + h)?, conn.coeffs(x, y - h)?)
    };
    Ok(p.combine(&m, |a, b| (a - b) / (2.0 * h)))
}

/// Partial derivatives by Richardson-extrapolated central differences with
/// steps `step` and `step/2`.
pub fn coeff_partials_fd<C: Connection>(conn: &C, x: f64, y: f64, step: f64) -> Result<CoeffPartials> {
    let rich = |along_x: bool| -> Result<ConnCoeffs> {
        let coarse = central(conn, x, y, step, along_x)?;
        let fine = central(conn, x, y, 0.5 * step, along_x)?;
        Ok(fine.combine(&coarse, |f, c| (4.0 * f - c) / 3.0))
    };
    Ok(CoeffPartials {
        dx: rich(true)?,
        dy: rich(false)?,
    })
}

/// The five integrability identities evaluated as residuals
/// `[(a1)_y - a2 c1, (a2)_x - a1 c2, (b1)_y - b2 c1, (b2)_x - b1 c2,
///   (c2)_x + (c1)_y + a1 a2 + b1 b2]`.
pub fn maurer_cartan_terms(c: &ConnCoeffs, p: &CoeffPartials) -> [f64; 5] {
    [
        p.dy.a1 - c.a2 * c.c1,
        p.dx.a2 - c.a1 * c.c2,
        p.dy.b1 - c.b2 * c.c1,
        p.dx.b2 - c.b1 * c.c2,
        p.dx.c2 + p.dy.c1 + c.a1 * c.a2 + c.b1 * c.b2,
    ]
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, t| m.max(t.abs()))
}

/// Largest violation of the integrability identities, derivatives by
/// finite differences.
pub fn maurer_cartan_residual(x: f64, y: f64, fd_step: f64) -> Result<f64> {
    if !(fd_step > 0.0) || !(x > fd_step) {
        return Err(domain("x - fd_step", x - fd_step));
    }
    let c = conn_coeffs(x, y)?;
    let p = coeff_partials_fd(&SurfaceConnection, x, y, fd_step)?;
    Ok(max_abs(&maurer_cartan_terms(&c, &p)))
}

/// As [`maurer_cartan_residual`] with closed-form derivatives.
pub fn maurer_cartan_residual_analytic(x: f64, y: f64) -> Result<f64> {
    let c = conn_coeffs(x, y)?;
    let p = coeff_partials_analytic(x, y)?;
    Ok(max_abs(&maurer_cartan_terms(&c, &p)))
}

/// Where a point sits relative to the excluded sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Regular,
    S1Degenerate,
    S2Excluded,
    OffDomain,
}

impl PointClass {
    pub fn name(&self) -> &'static str {
        match self {
            PointClass::Regular => "Regular",
            PointClass::S1Degenerate => "S1_degenerate",
            PointClass::S2Excluded => "S2_excluded",
            PointClass::OffDomain => "OffDomain",
        }
    }
}

pub const S2_PROXIMITY_TOL: f64 = 1e-9;

pub fn classify_point(x: f64, y: f64) -> PointClass {
    classify_point_with(x, y, S2_PROXIMITY_TOL)
}

/// `tol` bounds the distance estimate `|g| / |grad g|` to the zero set of
/// each defining function `g`.
pub fn classify_point_with(x: f64, y: f64, tol: f64) -> PointClass {
    if !(x > 0.0) || !y.is_finite() || x > specfun::X_MAX_DEFAULT {
        return PointClass::OffDomain;
    }
    let scale = 1.0f64.max(x).max(y.abs());
    if y.abs() <= tol * scale || (x - y.abs()).abs() <= tol * scale {
        return PointClass::S1Degenerate;
    }
    match specfun::s2_function(x, y) {
        Ok((g, grad)) if g.abs() <= tol * grad.max(1e-300) => PointClass::S2Excluded,
        Ok(_) => PointClass::Regular,
        Err(_) => PointClass::OffDomain,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_are_skew_with_fixed_pattern() {
        let c = conn_coeffs(1.3, -0.4).unwrap();
        let o = omega_from(&c);
        assert_eq!(o.omega1 + o.omega1.transpose(), Matrix4::zeros());
        assert_eq!(o.omega2 + o.omega2.transpose(), Matrix4::zeros());
        let nz1 = [(0, 1), (1, 0), (1, 2), (2, 1), (1, 3), (3, 1)];
        let nz2 = [(0, 2), (2, 0), (1, 2), (2, 1), (2, 3), (3, 2)];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(o.omega1[(i, j)] != 0.0, nz1.contains(&(i, j)));
                assert_eq!(o.omega2[(i, j)] != 0.0, nz2.contains(&(i, j)));
            }
        }
    }

    #[test]
    fn cube_identity() {
        for &(x, y) in &[(0.3, 0.1), (1.0, 2.0), (4.0, -1.0), (20.0, 3.0), (0.9, 0.0)] {
            let c = conn_coeffs(x, y).unwrap();
            let o = omega_from(&c);
            let r1 = o.omega1 * o.omega1 * o.omega1 + o.omega1 * c.nu1_sq();
            let r2 = o.omega2 * o.omega2 * o.omega2 + o.omega2 * c.nu2_sq();
            assert!(r1.amax() < 1e-12 * c.nu1_sq().max(1.0).powf(1.5));
            assert!(r2.amax() < 1e-12 * c.nu2_sq().max(1.0).powf(1.5));
        }
    }

    #[test]
    fn y_odd_coefficients_vanish_on_axis() {
        let c = conn_coeffs(1.7, 0.0).unwrap();
        assert_eq!(c.a1, 0.0);
        assert_eq!(c.b2, 0.0);
        assert_eq!(c.c2, 0.0);
        assert!((c.a2 + 1.0).abs() < 1e-15);
        let o = omega_from(&c);
        assert!(o.omega2[(0, 2)] != 0.0);
        assert_eq!(o.omega2.iter().filter(|v| **v != 0.0).count(), 2);
    }

    #[test]
    fn a2_closed_form() {
        for &(x, y) in &[(0.5, 0.3), (2.0, -1.5), (7.0, 4.0)] {
            let e = specfun::x0(x).unwrap();
            let c = conn_coeffs(x, y).unwrap();
            let h = specfun::h_from(&e, y);
            assert!((c.a2 - (-1.0 + 2.0 * y * y * e.d1_over_x / h)).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_relation() {
        let c = conn_coeffs(1.0, 1.0).unwrap();
        assert!((c.c1 + c.a1).abs() < 1e-15);
        let e = specfun::x0(1.0).unwrap();
        let h = specfun::h_from(&e, 1.0);
        assert!((c.a1 - 2.0 / h * (e.value + 0.5 * SQRT5)).abs() < 1e-15);
    }

    #[test]
    fn parity_in_y() {
        for &(x, y) in &[(0.4, 0.7), (3.0, 2.5)] {
            let p = conn_coeffs(x, y).unwrap();
            let m = conn_coeffs(x, -y).unwrap();
            assert_eq!(p.a1, -m.a1);
            assert_eq!(p.b2, -m.b2);
            assert_eq!(p.c2, -m.c2);
            assert_eq!(p.b1, m.b1);
            assert_eq!(p.c1, m.c1);
            assert_eq!(p.a2, m.a2);
        }
    }

    #[test]
    fn b1_large_x_limit() {
        let x = 50.0;
        let e = specfun::x0(x).unwrap();
        let c = conn_coeffs(x, 1.0).unwrap();
        let lim = -SQRT5 * x / (2.0 * e.value - x * e.d1);
        assert!(((c.b1 - lim) / lim).abs() < 0.05);
    }

    #[test]
    fn flatness_examples() {
        assert!(maurer_cartan_residual(2.0, 1.0, 1e-4).unwrap() <= 1e-6);
        assert!(maurer_cartan_residual(0.3, -2.0, 1e-5).unwrap() <= 1e-5);
        let c = conn_coeffs(1.5, 0.0).unwrap();
        let p = coeff_partials_fd(&SurfaceConnection, 1.5, 0.0, 1e-4).unwrap();
        assert!((p.dy.a1 - c.a2 * c.c1).abs() <= 1e-8);
    }

    #[test]
    fn analytic_and_fd_partials_agree() {
        for &(x, y) in &[(0.25, 0.5), (1.0, -1.0), (3.0, 2.0), (30.0, 1.0)] {
            let a = coeff_partials_analytic(x, y).unwrap();
            let f = coeff_partials_fd(&SurfaceConnection, x, y, 1e-3 * x.min(1.0)).unwrap();
            for (u, v) in a.dx.as_array().iter().zip(f.dx.as_array().iter()) {
                assert!((u - v).abs() < 1e-7 * u.abs().max(1.0), "dx {x} {y}: {u} {v}");
            }
            for (u, v) in a.dy.as_array().iter().zip(f.dy.as_array().iter()) {
                assert!((u - v).abs() < 1e-7 * u.abs().max(1.0), "dy {x} {y}: {u} {v}");
            }
            assert!(maurer_cartan_residual_analytic(x, y).unwrap() < 1e-11);
        }
    }

    #[test]
    fn matrix_compatibility_condition() {
        // (Omega1)_y - (Omega2)_x = [Omega1, Omega2]
        let (x, y) = (1.4, 0.8);
        let c = conn_coeffs(x, y).unwrap();
        let p = coeff_partials_analytic(x, y).unwrap();
        let o = omega_from(&c);
        let lhs = omega1_matrix(&p.dy) - omega2_matrix(&p.dx);
        let rhs = o.omega1 * o.omega2 - o.omega2 * o.omega1;
        assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn classification() {
        assert_eq!(classify_point(1.0, 1.0), PointClass::S1Degenerate);
        assert_eq!(classify_point(2.0, 0.0), PointClass::S1Degenerate);
        assert_eq!(classify_point(1.0, 0.5), PointClass::Regular);
        assert_eq!(classify_point(-1.0, 0.0), PointClass::OffDomain);
        let (g, _) = specfun::s2_function(1.0, 0.5).unwrap();
        assert!(g.abs() > 1e-3);
    }

    #[test]
    fn phi_branches() {
        let p = phi_pair(1.0, 2.0).unwrap();
        assert!(p.phi_branch > core::f64::consts::FRAC_PI_2 && p.phi_branch < core::f64::consts::PI);
        let p = phi_pair(1.0, -2.0).unwrap();
        assert!(p.phi_branch < -core::f64::consts::FRAC_PI_2);
        let p = phi_pair(1.0, 1.0).unwrap();
        assert!((p.phi_branch - core::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let q = phi_pair(-1.0, 0.5).unwrap();
        assert_eq!(q.phi_branch, -phi_pair(1.0, 0.5).unwrap().phi_branch);
        assert!((p.cos_phi.powi(2) + p.sin_phi.powi(2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn metric_densities_even() {
        let a = step_weights(0.8, 0.3).unwrap();
        let b = step_weights(0.8, -0.3).unwrap();
        let c = step_weights(-0.8, 0.3).unwrap();
        assert_eq!(a.theta1_density, b.theta1_density);
        assert_eq!(a.theta2_density.abs(), b.theta2_density.abs());
        assert_eq!(a.theta1_density.powi(2), c.theta1_density.powi(2));
        assert_eq!(step_weights(1.0, 1.0).unwrap().theta1_density, 0.0);
        assert_eq!(step_weights(1.0, 0.0).unwrap().theta2_density, 0.0);
    }
}
