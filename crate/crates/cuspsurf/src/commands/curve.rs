use std::path::Path;

use cuspsurf_core::connection::SurfaceConnection;
use cuspsurf_core::curves::*;
use cuspsurf_core::integrator::Frame;
use cuspsurf_core::specfun;
use serde::Serialize;

use crate::args::{CurveArgs, CurveKindArg, Format};
use crate::config::CurveSection;
use crate::error::{CliError, Result};
use crate::formats::{init_frame, project, sidecar_path, write_curve_csv, write_json, write_ply, Sink};

pub const DEFAULT_N: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveJob {
    pub kind: CurveKindArg,
    /// `y0` for x- and u-curves, `x0` for y-curves, unused on the diagonal.
    pub fixed: f64,
    pub range: (f64, f64),
    pub n: usize,
    pub init: Frame,
}

#[derive(Debug, Serialize)]
pub struct SphereJson {
    pub center: [f64; 4],
    pub radius: f64,
    pub normal: [f64; 4],
    pub max_radial_dev: f64,
    pub max_planar_dev: f64,
}

impl From<&SphereFit> for SphereJson {
    fn from(s: &SphereFit) -> Self {
        SphereJson {
            center: s.center.into(),
            radius: s.radius,
            normal: s.normal.into(),
            max_radial_dev: s.max_radial_dev,
            max_planar_dev: s.max_planar_dev,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Sidecar {
    pub kind: &'static str,
    pub fixed: Option<f64>,
    pub range: [f64; 2],
    pub n: usize,
    pub samples: usize,
    pub sphere: Option<SphereJson>,
    pub expected_radius: Option<f64>,
    pub center_drift: Option<f64>,
}

fn kind_name(k: CurveKindArg) -> &'static str {
    match k {
        CurveKindArg::X => "x",
        CurveKindArg::Y => "y",
        CurveKindArg::Diagonal => "diagonal",
        CurveKindArg::U => "u",
    }
}

pub fn build(job: &CurveJob) -> Result<CurveSample> {
    let (lo, hi) = job.range;
    Ok(match job.kind {
        CurveKindArg::X => build_x_curve(job.fixed, (lo, hi), job.n, &job.init)?,
        CurveKindArg::Y => build_y_curve(job.fixed, (lo, hi), job.n, &job.init)?,
        CurveKindArg::Diagonal => build_diagonal((lo, hi), job.n, &job.init)?.diagonal,
        CurveKindArg::U => {
            if !(lo < hi) {
                return Err(cuspsurf_core::Error::Domain { what: "range", value: hi - lo }.into());
            }
            let y = job.fixed;
            let du = (hi - lo) / job.n as f64;
            let (us, frames) = trace_u(&SurfaceConnection, y, (-lo).exp(), du, job.n, &job.init)?;
            let base = x_point(&job.init, y);
            CurveSample {
                kind: CurveKind::UCurve { y },
                params: us.iter().map(|u| lo + u).collect(),
                points: frames.iter().map(|f| x_point(f, y) - base).collect(),
                frames,
            }
        }
    })
}

pub fn expected_radius(job: &CurveJob) -> Result<Option<f64>> {
    Ok(match job.kind {
        CurveKindArg::X | CurveKindArg::U => Some(x_curve_radius(job.fixed)),
        CurveKindArg::Y => Some(y_curve_radius(&specfun::x0(job.fixed)?)),
        CurveKindArg::Diagonal => None,
    })
}

pub fn sidecar(job: &CurveJob, curve: &CurveSample) -> Result<Sidecar> {
    let spherical = job.kind != CurveKindArg::Diagonal;
    let sphere = if spherical { Some(SphereJson::from(&fit_sphere(&curve.points)?)) } else { None };
    Ok(Sidecar {
        kind: kind_name(job.kind),
        fixed: spherical.then_some(job.fixed),
        range: [job.range.0, job.range.1],
        n: job.n,
        samples: curve.len(),
        sphere,
        expected_radius: expected_radius(job)?,
        center_drift: if spherical { Some(curve.center_drift()?) } else { None },
    })
}

fn resolve(args: &CurveArgs, cfg: &CurveSection) -> Result<CurveJob> {
    let kind = args.kind.or(cfg.kind).ok_or_else(|| CliError::Usage("curve needs --kind".into()))?;
    let fixed = match kind {
        CurveKindArg::X | CurveKindArg::U => args.y0.or(cfg.y0).ok_or_else(|| CliError::Usage("this curve needs --y0".into()))?,
        CurveKindArg::Y => args.x0.or(cfg.x0).ok_or_else(|| CliError::Usage("a y-curve needs --x0".into()))?,
        CurveKindArg::Diagonal => 0.0,
    };
    let range = match (&args.range, cfg.range) {
        (Some(r), _) => (r[0], r[1]),
        (None, Some(r)) => (r[0], r[1]),
        (None, None) => return Err(CliError::Usage("curve needs --range LO HI".into())),
    };
    let n = args.n.or(cfg.n).unwrap_or(DEFAULT_N);
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let init = init_frame(args.init.as_deref().or(cfg.init.as_deref()))?;
    Ok(CurveJob { kind, fixed, range, n, init })
}

fn format_for(explicit: Option<Format>, output: Option<&Path>) -> Format {
    explicit.unwrap_or_else(|| match output.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("ply") => Format::Ply,
        _ => Format::Csv,
    })
}

pub fn run(args: CurveArgs, cfg: CurveSection) -> Result<()> {
    let job = resolve(&args, &cfg)?;
    let output = args.output.or(cfg.output);
    let format = format_for(args.format.or(cfg.format), output.as_deref());
    let curve = build(&job)?;
    let sink = Sink::open(output.as_deref())?;
    match format {
        Format::Csv => {
            write_curve_csv(sink, &curve)?;
            if let Some(out) = &output {
                write_json(&sidecar_path(out), &sidecar(&job, &curve)?)?;
            }
        }
        Format::Ply => {
            let pts = project(&curve.points, &curve.frames[0], &curve.points[0]);
            write_ply(sink, &format!("cuspsurf {}-curve", kind_name(job.kind)), &pts)?;
        }
    }
    Ok(())
}
