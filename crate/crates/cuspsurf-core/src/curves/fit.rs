//! Least-squares spheres and circles for point clouds in R^4.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen, Vector4};

use crate::error::{Error, Result};

use super::Point;

/// Mean and principal axes of a cloud, axes sorted by decreasing variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Point,
    pub variances: [f64; 4],
    pub axes: [Point; 4],
}

pub fn pca(points: &[Point]) -> Result<Pca> {
    if points.is_empty() {
        return Err(Error::InsufficientResolution("empty point set"));
    }
    if points.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(Error::NonConvergence("non-finite point"));
    }
    let m = points.len() as f64;
    let mean = points.iter().fold(Point::zeros(), |a, p| a + p) / m;
    let mut cov = Matrix4::zeros();
    for p in points {
        let d = p - mean;
        cov += d * d.transpose();
    }
    cov /= m;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut variances = [0.0; 4];
    let mut axes = [Point::zeros(); 4];
    for (slot, &k) in order.iter().enumerate() {
        variances[slot] = eig.eigenvalues[k];
        axes[slot] = eig.eigenvectors.column(k).into_owned();
    }
    Ok(Pca { mean, variances, axes })
}

/// A 2-sphere inside an affine hyperplane of R^4.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereFit {
    pub center: Point,
    pub radius: f64,
    /// Unit normal of the hyperplane carrying the sphere.
    pub normal: Point,
    pub max_radial_dev: f64,
    pub max_planar_dev: f64,
}

/// Solves `|q|^2 = 2 c.q + k` in the least-squares sense for the coordinates
/// `q` of the points in an orthonormal basis of dimension `dim`.
fn algebraic_fit(coords: &[Vec<f64>], dim: usize) -> Result<(Vec<f64>, f64)> {
    let m = coords.len();
    if m < dim + 1 {
        return Err(Error::InsufficientResolution("too few points for the fit"));
    }
    // unit RMS scale keeps the columns of the design matrix comparable
    let ms = coords.iter().map(|q| q.iter().map(|c| c * c).sum::<f64>()).sum::<f64>() / m as f64;
    let s = if ms > 0.0 { libm::sqrt(ms) } else { 1.0 };
    let a = DMatrix::from_fn(m, dim + 1, |i, j| if j < dim { 2.0 * coords[i][j] / s } else { 1.0 });
    let b = DVector::from_fn(m, |i, _| coords[i].iter().map(|c| (c / s) * (c / s)).sum::<f64>());
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&b, 1e-14)
        .map_err(|_| Error::NonConvergence("least-squares solve failed"))?;
    let c: Vec<f64> = (0..dim).map(|j| sol[j] * s).collect();
    let r2 = (sol[dim] + (0..dim).map(|j| sol[j] * sol[j]).sum::<f64>()) * s * s;
    if !(r2 > 0.0) {
        return Err(Error::NonConvergence("fitted radius is not real"));
    }
    Ok((c, r2))
}

/// Fits a 2-sphere: the hyperplane by PCA, then an algebraic sphere in it.
pub fn fit_sphere(points: &[Point]) -> Result<SphereFit> {
    let p = pca(points)?;
    let basis = [p.axes[0], p.axes[1], p.axes[2]];
    let normal = p.axes[3];
    let coords: Vec<Vec<f64>> = points
        .iter()
        .map(|q| basis.iter().map(|e| e.dot(&(q - p.mean))).collect())
        .collect();
    let (c, r2) = algebraic_fit(&coords, 3)?;
    let center = p.mean + basis[0] * c[0] + basis[1] * c[1] + basis[2] * c[2];
    let radius = libm::sqrt(r2);
    let mut max_radial_dev: f64 = 0.0;
    let mut max_planar_dev: f64 = 0.0;
    for q in points {
        max_radial_dev = max_radial_dev.max(((q - center).norm() - radius).abs());
        max_planar_dev = max_planar_dev.max(normal.dot(&(q - p.mean)).abs());
    }
    Ok(SphereFit {
        center,
        radius,
        normal,
        max_radial_dev,
        max_planar_dev,
    })
}

/// A circle in a 2-plane of R^4.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleFit {
    pub center: Point,
    pub radius: f64,
    /// Orthonormal basis of the plane.
    pub plane: [Point; 2],
    pub max_radial_dev: f64,
    pub max_planar_dev: f64,
}

pub fn fit_circle(points: &[Point]) -> Result<CircleFit> {
    let p = pca(points)?;
    let plane = [p.axes[0], p.axes[1]];
    let coords: Vec<Vec<f64>> = points
        .iter()
        .map(|q| plane.iter().map(|e| e.dot(&(q - p.mean))).collect())
        .collect();
    let (c, r2) = algebraic_fit(&coords, 2)?;
    let center = p.mean + plane[0] * c[0] + plane[1] * c[1];
    let radius = libm::sqrt(r2);
    let mut max_radial_dev: f64 = 0.0;
    let mut max_planar_dev: f64 = 0.0;
    for q in points {
        let d = q - center;
        let inplane = plane[0] * plane[0].dot(&d) + plane[1] * plane[1].dot(&d);
        max_planar_dev = max_planar_dev.max((d - inplane).norm());
        max_radial_dev = max_radial_dev.max((inplane.norm() - radius).abs());
    }
    Ok(CircleFit {
        center,
        radius,
        plane,
        max_radial_dev,
        max_planar_dev,
    })
}

/// Least-squares fit `v_k ~ cos(a_k) P + sin(a_k) Q` for known angles;
/// returns `(P, Q, max residual)`.
pub fn fit_rotating_pair(angles: &[f64], vectors: &[Point]) -> Result<(Point, Point, f64)> {
    let m = angles.len();
    if m < 2 || vectors.len() != m {
        return Err(Error::InsufficientResolution("too few samples for the phase fit"));
    }
    let a = DMatrix::from_fn(m, 2, |i, j| {
        if j == 0 {
            libm::cos(angles[i])
        } else {
            libm::sin(angles[i])
        }
    });
    let b = DMatrix::from_fn(m, 4, |i, j| vectors[i][j]);
    let svd = a.clone().svd(true, true);
    let sol = svd
        .solve(&b, 1e-14)
        .map_err(|_| Error::NonConvergence("least-squares solve failed"))?;
    let pv = Vector4::new(sol[(0, 0)], sol[(0, 1)], sol[(0, 2)], sol[(0, 3)]);
    let qv = Vector4::new(sol[(1, 0)], sol[(1, 1)], sol[(1, 2)], sol[(1, 3)]);
    let mut res: f64 = 0.0;
    for (t, v) in angles.iter().zip(vectors) {
        res = res.max((v - pv * libm::cos(*t) - qv * libm::sin(*t)).norm());
    }
    Ok((pv, qv, res))
}

/// Unwrapped polar angles of the projections of `vectors` onto a plane.
pub fn unwrapped_angles(vectors: &[Point], plane: &[Point; 2]) -> Vec<f64> {
    let mut out = Vec::with_capacity(vectors.len());
    let mut prev = 0.0;
    let mut offset = 0.0;
    for (k, v) in vectors.iter().enumerate() {
        let raw = libm::atan2(plane[1].dot(v), plane[0].dot(v));
        if k > 0 {
            let mut d = raw + offset - prev;
            while d > core::f64::consts::PI {
                offset -= 2.0 * core::f64::consts::PI;
                d -= 2.0 * core::f64::consts::PI;
            }
            while d < -core::f64::consts::PI {
                offset += 2.0 * core::f64::consts::PI;
                d += 2.0 * core::f64::consts::PI;
            }
        }
        prev = raw + offset;
        out.push(prev);
    }
    out
}

/// Ordinary least-squares line `y = slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_recovered() {
        let c = Vector4::new(0.3, -1.0, 2.0, 0.5);
        let n = Vector4::new(1.0, 1.0, 0.0, 1.0).normalize();
        let e1 = Vector4::new(1.0, -1.0, 0.0, 0.0).normalize();
        let e3 = n.cross_like(&e1);
        let e2 = Vector4::new(0.0, 0.0, 1.0, 0.0);
        let mut pts = Vec::new();
        for i in 0..40 {
            let th = 0.1 + 0.07 * i as f64;
            let ph = 0.3 * i as f64;
            let d = e1 * (libm::sin(th) * libm::cos(ph)) + e2 * (libm::sin(th) * libm::sin(ph)) + e3 * libm::cos(th);
            pts.push(c + d * 0.7);
        }
        let f = fit_sphere(&pts).unwrap();
        assert!((f.radius - 0.7).abs() < 1e-12);
        assert!((f.center - c).norm() < 1e-12);
        assert!(f.max_planar_dev < 1e-12);
        assert!(f.normal.dot(&n).abs() > 1.0 - 1e-12);
    }

    trait CrossLike {
        fn cross_like(&self, other: &Self) -> Self;
    }

    impl CrossLike for Vector4<f64> {
        // a unit vector orthogonal to self, other and e3
        fn cross_like(&self, other: &Self) -> Self {
            let e2 = Vector4::new(0.0, 0.0, 1.0, 0.0);
            let mut v = Vector4::new(0.0, 0.0, 0.0, 1.0);
            for b in [self, other, &e2] {
                let b = b.normalize();
                v -= b * b.dot(&v);
            }
            v.normalize()
        }
    }

    #[test]
    fn circle_recovered() {
        let c = Vector4::new(1.0, 2.0, 3.0, 4.0);
        let e1 = Vector4::new(1.0, 0.0, 1.0, 0.0).normalize();
        let e2 = Vector4::new(0.0, 1.0, 0.0, -1.0).normalize();
        let pts: Vec<Point> = (0..30)
            .map(|k| {
                let t = 0.2 * k as f64;
                c + (e1 * libm::cos(t) + e2 * libm::sin(t)) * 0.25
            })
            .collect();
        let f = fit_circle(&pts).unwrap();
        assert!((f.radius - 0.25).abs() < 1e-12);
        assert!((f.center - c).norm() < 1e-12);
    }

    #[test]
    fn angles_unwrap() {
        let plane = [Vector4::new(1.0, 0.0, 0.0, 0.0), Vector4::new(0.0, 1.0, 0.0, 0.0)];
        let v: Vec<Point> = (0..100)
            .map(|k| {
                let t = 0.3 * k as f64;
                Vector4::new(libm::cos(t), libm::sin(t), 0.0, 0.0)
            })
            .collect();
        let a = unwrapped_angles(&v, &plane);
        assert!((a[99] - 29.7).abs() < 1e-12);
    }
}
