use cuspsurf_core::connection::conn_coeffs;
use cuspsurf_core::curves::*;
use cuspsurf_core::integrator::*;
use cuspsurf_core::specfun;
use proptest::prelude::*;

fn orthogonal(entries: [f64; 16]) -> Frame {
    (Frame::from_row_slice(&entries) + Frame::identity() * 3.0).qr().q()
}

/// Plain power series of `X0` and `X0'` from its recurrence.
fn series_x0(x: f64) -> (f64, f64) {
    let mut a = 2.5;
    let mut v = 0.0;
    let mut d = 0.0;
    let x2 = x * x;
    let mut p = 1.0;
    for k in 0..60 {
        let kf = k as f64;
        v += a * p;
        if k > 0 {
            d += 2.0 * kf * a * p / x;
        }
        a = -(2.0 * kf - 1.0) * a / (2.0 * (kf + 1.0) * (4.0 * kf * kf + 1.25));
        p *= x2;
    }
    (v, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn x0_matches_plain_series(x in -1.0f64..1.0) {
        let e = specfun::x0(x).unwrap();
        let (v, d) = series_x0(x);
        prop_assert!((e.value - v).abs() < 1e-14);
        prop_assert!((e.d1 - d).abs() < 1e-13);
    }

    #[test]
    fn steps_are_orthogonal_and_equivariant(
        q in prop::array::uniform16(-1.0f64..1.0),
        x in 0.2f64..5.0,
        y in -3.0f64..3.0,
        d in -0.05f64..0.05,
    ) {
        let q = orthogonal(q);
        let f = orthogonal([0.3; 16]);
        let a = step_x(&(q * f), (x, y), d).unwrap();
        let b = q * step_x(&f, (x, y), d).unwrap();
        prop_assert!(frobenius(&(a - b)) < 1e-13);
        prop_assert!(orthogonality_defect(&a) < 1e-13);
        let a = step_y(&(q * f), (x, y), d).unwrap();
        let b = q * step_y(&f, (x, y), d).unwrap();
        prop_assert!(frobenius(&(a - b)) < 1e-13);
        prop_assert!(orthogonality_defect(&a) < 1e-13);
    }

    #[test]
    fn coefficients_have_y_parity(x in 0.05f64..50.0, y in 0.01f64..20.0) {
        let p = conn_coeffs(x, y).unwrap();
        let m = conn_coeffs(x, -y).unwrap();
        let tol = |v: f64| 1e-13 * (1.0 + v.abs());
        prop_assert!((p.a1 + m.a1).abs() <= tol(p.a1));
        prop_assert!((p.b2 + m.b2).abs() <= tol(p.b2));
        prop_assert!((p.c2 + m.c2).abs() <= tol(p.c2));
        prop_assert!((p.b1 - m.b1).abs() <= tol(p.b1));
        prop_assert!((p.c1 - m.c1).abs() <= tol(p.c1));
        prop_assert!((p.a2 - m.a2).abs() <= tol(p.a2));
    }

    #[test]
    fn x_curves_keep_u_and_their_sphere(y in -4.0f64..4.0, lo in 0.05f64..1.0, w in 0.5f64..5.0, n in 50usize..400) {
        let c = build_x_curve(y, (lo, lo + w), n, &Frame::identity()).unwrap();
        let u0 = u_vec(&c.frames[0], y);
        let r = x_curve_radius(y);
        let a0 = c.points[0] - f_vec(&c.frames[0], y) * r;
        for (p, f) in c.points.iter().zip(&c.frames) {
            prop_assert!((u_vec(f, y) - u0).norm() < 1e-12);
            prop_assert!((p - f_vec(f, y) * r - a0).norm() < 1e-12);
        }
    }

    #[test]
    fn y_curves_keep_their_sphere_and_reflect(x in 0.05f64..60.0, a in 0.5f64..20.0, half in 20usize..300) {
        let c = build_y_curve(x, (-a, a), 2 * half, &Frame::identity()).unwrap();
        let e = specfun::x0(x).unwrap();
        let r = y_curve_radius(&e);
        let a0 = c.points[0] - ftilde_vec(&c.frames[0], &e) * r;
        for (p, f) in c.points.iter().zip(&c.frames) {
            prop_assert!((p - ftilde_vec(f, &e) * r - a0).norm() < 1e-12 * (1.0 + r));
        }
        prop_assert!(reflection_residual(&c).unwrap() < 1e-9);
    }

    #[test]
    fn sphere_fit_recovers_spheres(
        q in prop::array::uniform16(-1.0f64..1.0),
        c in prop::array::uniform4(-5.0f64..5.0),
        r in 0.1f64..10.0,
    ) {
        let g = orthogonal(q);
        let center = Point::from(c);
        let pts: Vec<Point> = (0..60)
            .map(|k| {
                let th = 0.2 + 2.7 * k as f64 / 59.0;
                let ph = 2.4 * k as f64;
                let d = Point::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos(), 0.0);
                center + g * d * r
            })
            .collect();
        let fit = fit_sphere(&pts).unwrap();
        prop_assert!((fit.radius - r).abs() < 1e-9 * r, "{} vs {r}, planar {:e}", fit.radius, fit.max_planar_dev);
        prop_assert!((fit.center - center).norm() < 1e-9 * (1.0 + r));
        prop_assert!(fit.normal.dot(&g.column(3)).abs() > 1.0 - 1e-9);
    }
}
