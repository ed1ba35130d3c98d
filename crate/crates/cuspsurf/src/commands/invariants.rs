use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::time::Instant;

use cuspsurf_core::connection::{maurer_cartan_residual, SurfaceConnection};
use cuspsurf_core::curves::*;
use cuspsurf_core::integrator::*;
use cuspsurf_core::specfun::{self, GKind, SQRT5};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::args::InvariantsArgs;
use crate::config::InvariantsSection;
use crate::error::{CliError, Result};
use crate::formats::write_json;

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub name: String,
    /// The raw quantity, e.g. a fitted exponent.
    pub value: f64,
    /// The deviation compared with the bound.
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub entries: Vec<Entry>,
    pub summary: Summary,
}

pub struct Settings {
    /// Rectangle `(x0, y0, a)` of the convergence-order checks.
    pub rect: (f64, f64, f64),
    pub n_max: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { rect: (2.0, 1.0, 1.0), n_max: 128 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Orders {
    canonical: f64,
    global: f64,
    bound_ratio: f64,
}

struct Ctx {
    settings: Settings,
    orders: OnceCell<Orders>,
    u: OnceCell<UReport>,
    y: OnceCell<(YReport, f64)>,
}

impl Ctx {
    fn orders(&self) -> Result<Orders> {
        if let Some(o) = self.orders.get() {
            return Ok(*o);
        }
        let (x0, y0, a) = self.settings.rect;
        let id = Frame::identity();
        let target = (x0 + a, y0 + a);
        let reference = reference_frame_at(&SurfaceConnection, (x0, y0), target, &id, 1e-13)?;
        let k = estimate_k(&GridSpec::new(x0, y0, a, 8)?, 50)?.k;
        let mut ds = Vec::new();
        let mut canon = Vec::new();
        let mut glob = Vec::new();
        let mut ratio: f64 = 0.0;
        let mut n = 8;
        while n <= self.settings.n_max.max(16) {
            let grid = GridSpec::new(x0, y0, a, n)?;
            let (lo, up) = canonical_frames(&grid, target, &id)?;
            let e = frobenius(&(lo - reference)).max(frobenius(&(up - reference)));
            ds.push(grid.delta());
            canon.push(frobenius(&(lo - up)));
            glob.push(e);
            ratio = ratio.max(e / global_error_bound(k, a, grid.delta()));
            n *= 2;
        }
        let o = Orders { canonical: loglog_slope(&ds, &canon), global: loglog_slope(&ds, &glob), bound_ratio: ratio };
        Ok(*self.orders.get_or_init(|| o))
    }

    fn u(&self) -> Result<&UReport> {
        if self.u.get().is_none() {
            let r = asymptotic_u_analysis(&[0.0, 1.0, 2.0], &UAnalysisConfig::default())?;
            let _ = self.u.set(r);
        }
        Ok(self.u.get().unwrap())
    }

    fn y(&self) -> Result<&(YReport, f64)> {
        if self.y.get().is_none() {
            let xs: Vec<f64> = (0..10).map(|k| 0.5 + 0.5 * k as f64).collect();
            let cfg = YAnalysisConfig::default();
            let r = asymptotic_y_analysis(&xs, &cfg)?;
            let _ = self.y.set((r, cfg.y_max));
        }
        Ok(self.y.get().unwrap())
    }
}

/// `(value, measured)` of one check.
type CheckFn = fn(&Ctx) -> Result<(f64, f64)>;

struct Check {
    name: &'static str,
    bound: f64,
    default: bool,
    run: CheckFn,
}

fn same(v: f64) -> (f64, f64) {
    (v, v)
}

fn exps_off(e: [f64; 3]) -> f64 {
    e.iter().zip([2.0, 3.0, 4.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn checks() -> Vec<Check> {
    vec![
        Check {
            name: "g-integral-x0",
            bound: 1e-9,
            default: true,
            run: |_| {
                let mut m: f64 = 0.0;
                for k in 0..1000 {
                    let x = -10.0 + 20.0 * k as f64 / 999.0;
                    m = m.max((specfun::g_first_integral(GKind::X0, x)? + 5.0).abs());
                }
                Ok(same(m))
            },
        },
        Check {
            name: "g-integral-x1",
            bound: 1e-8,
            default: true,
            run: |_| {
                let mut m: f64 = 0.0;
                for k in 0..1000 {
                    let x = -10.0 + 20.0 * k as f64 / 999.0;
                    m = m.max((specfun::g_first_integral(GKind::X1Sqrt5, x)? - 20.0).abs());
                }
                Ok(same(m))
            },
        },
        Check {
            name: "h-integral",
            bound: 1e-12,
            default: true,
            run: |_| {
                let m = (0..1000)
                    .map(|k| -10.0 + 20.0 * k as f64 / 999.0)
                    .map(|y| (specfun::h_first_integral_sqrt5(y) + 20.0).abs())
                    .fold(0.0, f64::max);
                Ok(same(m))
            },
        },
        Check {
            name: "tau",
            bound: 0.0,
            default: true,
            run: |_| {
                let b = specfun::tau_lower_bound_check(10.0)?;
                Ok((b, 2.35 - b))
            },
        },
        Check {
            name: "tau-80",
            bound: 0.01,
            default: true,
            run: |_| {
                let t = specfun::tau(80.0)?;
                Ok((t, (t - SQRT5 * 1.0614).abs()))
            },
        },
        Check {
            name: "maurer-cartan",
            bound: 1e-5,
            default: true,
            run: |_| {
                let mut m: f64 = 0.0;
                for i in 0..50 {
                    for j in 0..50 {
                        let x = 0.2 + 4.8 * i as f64 / 49.0;
                        let y = -3.0 + 6.0 * j as f64 / 49.0;
                        m = m.max(maurer_cartan_residual(x, y, 1e-4)?);
                    }
                }
                Ok(same(m))
            },
        },
        Check {
            name: "orthogonality",
            bound: 1e-12,
            default: true,
            run: |_| {
                let mut rng = rand::rngs::StdRng::seed_from_u64(7);
                let mut f = Frame::identity();
                let (mut x, mut y) = (2.0, 1.0);
                for _ in 0..1_000_000 {
                    let d: f64 = rng.random_range(-0.005..0.005);
                    if rng.random::<bool>() {
                        let d = if (x + d - 2.0f64).abs() > 0.5 { -d } else { d };
                        f = step_x(&f, (x, y), d)?;
                        x += d;
                    } else {
                        let d = if (y + d - 1.0f64).abs() > 0.5 { -d } else { d };
                        f = step_y(&f, (x, y), d)?;
                        y += d;
                    }
                }
                Ok(same(orthogonality_defect(&f)))
            },
        },
        Check {
            name: "order-local",
            bound: 0.15,
            default: true,
            run: |c| {
                let (x0, y0, a) = c.settings.rect;
                let base = (x0 + 0.4 * a, y0 + 0.3 * a);
                let ds: Vec<f64> = (0..6).map(|k| 0.02 * a / f64::powi(2.0, k)).collect();
                let defects = ds
                    .iter()
                    .map(|d| plaquette_defect(&SurfaceConnection, base, *d))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let p = loglog_slope(&ds, &defects);
                Ok((p, (p - 3.0).abs()))
            },
        },
        Check {
            name: "order-canonical",
            bound: 0.15,
            default: true,
            run: |c| {
                let p = c.orders()?.canonical;
                Ok((p, (p - 1.0).abs()))
            },
        },
        Check {
            name: "order-global",
            bound: 0.15,
            default: true,
            run: |c| {
                let p = c.orders()?.global;
                Ok((p, (p - 1.0).abs()))
            },
        },
        Check {
            name: "global-bound",
            bound: 1.0,
            default: true,
            run: |c| Ok(same(c.orders()?.bound_ratio)),
        },
        Check {
            name: "sphere-x",
            bound: 1e-4,
            default: true,
            run: |_| {
                let mut m: f64 = 0.0;
                for &y in &[0.0, 1.0, 2.0] {
                    let c = build_x_curve(y, (0.002, 100.0), 4096, &Frame::identity())?;
                    m = m.max(c.center_drift()?);
                    m = m.max((fit_sphere(&c.points)?.radius - x_curve_radius(y)).abs());
                }
                Ok(same(m))
            },
        },
        Check {
            name: "sphere-y",
            bound: 1e-4,
            default: true,
            run: |_| {
                let mut m: f64 = 0.0;
                for &x in &[0.5, 2.0, 10.0] {
                    let c = build_y_curve(x, (-100.0, 100.0), 4000, &Frame::identity())?;
                    let e = specfun::x0(x)?;
                    m = m.max(c.center_drift()?);
                    m = m.max((fit_sphere(&c.points)?.radius - y_curve_radius(&e)).abs());
                }
                Ok(same(m))
            },
        },
        Check {
            name: "planarity-x",
            bound: 1e-10,
            default: true,
            run: |_| {
                let y = 1.0;
                let c = build_x_curve(y, (0.2, 3.0), 2000, &Frame::identity())?;
                let m = c
                    .points
                    .iter()
                    .zip(&c.frames)
                    .map(|(p, f)| (p - c.points[0]).dot(&(f.column(X_BETA) * y - f.column(PHI))).abs())
                    .fold(0.0, f64::max);
                Ok(same(m))
            },
        },
        Check {
            name: "utilde-constant",
            bound: 1e-9,
            default: true,
            run: |_| {
                let e = specfun::x0(2.0)?;
                let c = build_y_curve(2.0, (-4.0, 4.0), 3000, &Frame::identity())?;
                let u0 = utilde_vec(&c.frames[0], &e);
                Ok(same(c.frames.iter().map(|f| (utilde_vec(f, &e) - u0).norm()).fold(0.0, f64::max)))
            },
        },
        Check {
            name: "cusp-x",
            bound: 0.2,
            default: true,
            run: |_| {
                let c = build_x_curve(1.0, (0.5, 1.5), 1024, &Frame::identity())?;
                let e = detect_cusp(&c, CuspWindow::default())?.exponents;
                Ok((e[2], exps_off(e)))
            },
        },
        Check {
            name: "cusp-y",
            bound: 0.2,
            default: true,
            run: |_| {
                let c = build_y_curve(2.0, (-0.5, 0.5), 1024, &Frame::identity())?;
                let e = detect_cusp(&c, CuspWindow::default())?.exponents;
                Ok((e[2], exps_off(e)))
            },
        },
        Check {
            name: "no-cusp-y0",
            bound: 0.0,
            default: true,
            run: |_| {
                let c = build_x_curve(0.0, (0.002, 100.0), 4096, &Frame::identity())?;
                Ok(same(scan_cusps(&c, 0.1, 16).len() as f64))
            },
        },
        Check {
            name: "reflection",
            bound: 1e-9,
            default: true,
            run: |_| {
                let mut m: f64 = 0.0;
                for &(x, a, n) in &[(0.5, 10.0, 2000usize), (2.0, 100.0, 4000), (10.0, 5.0, 1000), (30.0, 3.0, 600)] {
                    m = m.max(reflection_residual(&build_y_curve(x, (-a, a), n, &Frame::identity())?)?);
                }
                Ok(same(m))
            },
        },
        Check {
            name: "u-speed",
            bound: 1e-3,
            default: true,
            run: |c| {
                let m = c.u()?.curves.iter().map(|r| (r.angular_speed - 0.5 * SQRT5).abs()).fold(0.0, f64::max);
                Ok(same(m))
            },
        },
        Check {
            name: "v0-norm",
            bound: 1e-8,
            default: true,
            run: |c| {
                let m = c.u()?.curves.iter().map(|r| (r.v0_norm - 0.5 * SQRT5).abs()).fold(0.0, f64::max);
                Ok(same(m))
            },
        },
        Check {
            name: "gamma-diameter",
            bound: 1e-6,
            default: true,
            run: |c| Ok(same(c.u()?.curves[0].gamma_diameter)),
        },
        Check {
            name: "du-dy",
            bound: 1e-6,
            default: true,
            run: |c| Ok(same(c.y()?.0.lines.iter().map(|l| l.du_dy_residual).fold(0.0, f64::max))),
        },
        Check {
            name: "u-utilde-orthogonal",
            bound: 1e-10,
            default: true,
            run: |c| Ok(same(c.y()?.0.orthogonality)),
        },
        Check {
            name: "limit-gap-decay",
            bound: 1.05,
            default: true,
            run: |c| {
                let (r, y_max) = c.y()?;
                let l = &r.lines[1];
                let e = specfun::x0(l.x)?;
                let envelope = 4.0 * l.x / (e.d1 * y_max);
                Ok((l.gaps[0], l.gaps[0] / envelope))
            },
        },
        Check {
            name: "limit-gap",
            bound: 1e-3,
            default: false,
            run: |c| Ok(same(c.y()?.0.lines[1].gaps[0])),
        },
    ]
}

pub fn names() -> Vec<&'static str> {
    checks().iter().map(|c| c.name).collect()
}

/// Runs the selected checks (the default set when `only` is empty).
pub fn run_checks(only: &[String], bounds: &BTreeMap<String, f64>, settings: Settings) -> Result<InvariantReport> {
    let all = checks();
    for name in only.iter().chain(bounds.keys()) {
        if !all.iter().any(|c| c.name == name) {
            return Err(CliError::Usage(format!("unknown check `{name}`")));
        }
    }
    let ctx = Ctx { settings, orders: OnceCell::new(), u: OnceCell::new(), y: OnceCell::new() };
    let mut entries = Vec::new();
    for c in all.iter().filter(|c| if only.is_empty() { c.default } else { only.iter().any(|o| o == c.name) }) {
        let t = Instant::now();
        let (value, measured) = (c.run)(&ctx)?;
        let bound = bounds.get(c.name).copied().unwrap_or(c.bound);
        entries.push(Entry {
            name: c.name.to_string(),
            value,
            measured,
            bound,
            pass: measured <= bound,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    let passed = entries.iter().filter(|e| e.pass).count();
    let total = entries.len();
    Ok(InvariantReport { entries, summary: Summary { passed, total } })
}

fn parse_bound(s: &str) -> Result<(String, f64)> {
    let (k, v) = s.split_once('=').ok_or_else(|| CliError::Usage(format!("--bound expects NAME=VALUE, got `{s}`")))?;
    let v: f64 = v.trim().parse().map_err(|_| CliError::Usage(format!("bad bound value in `{s}`")))?;
    Ok((k.trim().to_string(), v))
}

pub fn run(args: InvariantsArgs, cfg: InvariantsSection) -> Result<()> {
    if args.list {
        for c in checks() {
            println!("{}{}", c.name, if c.default { "" } else { " (not in the default set)" });
        }
        return Ok(());
    }
    let only = if args.only.is_empty() { cfg.only.unwrap_or_default() } else { args.only };
    let mut bounds = cfg.bounds;
    for b in &args.bounds {
        let (k, v) = parse_bound(b)?;
        bounds.insert(k, v);
    }
    let mut settings = Settings::default();
    if let Some(r) = args.rect.as_deref().map(|r| [r[0], r[1], r[2]]).or(cfg.rect) {
        settings.rect = (r[0], r[1], r[2]);
    }
    if let Some(n) = args.n.or(cfg.n) {
        if n < 16 {
            return Err(CliError::Usage("--n must be at least 16".into()));
        }
        settings.n_max = n;
    }
    let report = run_checks(&only, &bounds, settings)?;
    for e in &report.entries {
        println!(
            "{} {:<22} measured {:.3e} bound {:.3e} (value {:.6e}, {:.2} s)",
            if e.pass { "PASS" } else { "FAIL" },
            e.name,
            e.measured,
            e.bound,
            e.value,
            e.seconds
        );
    }
    println!("{}/{} passed", report.summary.passed, report.summary.total);
    if let Some(path) = args.report.or(cfg.report) {
        write_json(&path, &report)?;
    }
    if report.summary.passed < report.summary.total {
        return Err(CliError::Invariant(format!(
            "{} of {} checks failed",
            report.summary.total - report.summary.passed,
            report.summary.total
        )));
    }
    Ok(())
}
