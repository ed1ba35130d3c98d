//! The even entire function `X0` and the scalar quantities built from it.
//!
//! `X0(x) = 5/2 + sum_{k>=1} a_k x^{2k}` with `a_1 = 1` and
//! `2(k+1)(4k^2 + 5/4) a_{k+1} + (2k-1) a_k = 0`. It solves
//! `x X''' - X'' + (x + 9/(4x)) X' - X = 0`.
//!
//! The power series is summed directly for moderate `|x|` (plain compensated
//! f64 for `|x| <= 1`, double-double beyond). The series is cosine-like and its
//! terms grow like `e^|x|` before they decay, so past `|x| = 24` even
//! double-double runs out of digits. There the function is continued along
//! the real axis by local Taylor expansions generated from the differential
//! equation, starting from a table of anchors that is built once.

use alloc::boxed::Box;
use alloc::vec::Vec;

use once_cell::race::OnceBox;

use crate::dd::{Compensated, Dd};
use crate::error::{domain, Error, Result, SingularSet};
use crate::quad;

pub const SQRT5: f64 = 2.236_067_977_499_79;
/// Default bound on `|x|` accepted by [`eval_x0`].
pub const X_MAX_DEFAULT: f64 = 100.0;
/// Tolerance used by the convenience evaluator [`x0`].
pub const DEFAULT_TOL: f64 = 1e-14;
/// Absolute tolerance for the integrals `w` and `w~`.
pub const QUAD_TOL: f64 = 1e-10;

const TERM_CAP: usize = 600;
const PLAIN_LIMIT: f64 = 1.0;
const SERIES_LIMIT: f64 = 24.0;
const ANCHOR_LAST: usize = 76;
const TAYLOR_CAP: usize = 90;
const EPS: f64 = f64::EPSILON;
const DD_EPS: f64 = 4.93e-32;

/// `X0` and its first three derivatives at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct X0Eval {
    pub x: f64,
    pub value: f64,
    pub d1: f64,
    /// `X0'(x)/x`, equal to 2 at the origin.
    pub d1_over_x: f64,
    pub d2: f64,
    pub d3: f64,
    /// `X0''(x) - X0'(x)/x`, summed as its own series so it stays accurate
    /// near the origin where it is `O(x^2)`.
    pub d2_minus_d1_over_x: f64,
    pub terms_used: usize,
    pub est_error: f64,
}

/// Evaluates `X0` with the default domain bound `|x| <= 100`.
pub fn eval_x0(x: f64, tol: f64) -> Result<X0Eval> {
    eval_x0_with(x, tol, X_MAX_DEFAULT)
}

/// Evaluates `X0` at the default tolerance.
pub fn x0(x: f64) -> Result<X0Eval> {
    eval_x0(x, DEFAULT_TOL)
}

pub fn eval_x0_with(x: f64, tol: f64, x_max: f64) -> Result<X0Eval> {
    if !(tol > 0.0) {
        return Err(domain("tol", tol));
    }
    if !x.is_finite() || x.abs() > x_max {
        return Err(domain("x", x));
    }
    let ax = x.abs();
    let mut ev = if ax <= PLAIN_LIMIT {
        series_f64(ax, tol)?
    } else if ax <= SERIES_LIMIT {
        let s = series_dd(ax, tol)?;
        s.to_eval(ax)
    } else {
        continued(ax)?
    };
    if ev.est_error > tol * ev.value.abs().max(1.0) {
        return Err(Error::NonConvergence("X0 tolerance unreachable in working precision"));
    }
    if x < 0.0 {
        ev.d1 = -ev.d1;
        ev.d3 = -ev.d3;
    }
    ev.x = x;
    Ok(ev)
}

fn next_coeff_den(k: usize) -> (f64, f64) {
    let kf = k as f64;
    (-(2.0 * kf - 1.0), 2.0 * (kf + 1.0) * (4.0 * kf * kf + 1.25))
}

fn series_f64(x: f64, tol: f64) -> Result<X0Eval> {
    let s = x * x;
    let mut a = 1.0f64;
    let mut pw = 1.0f64; // s^(k-1)
    let mut pw_prev = 0.0f64; // s^(k-2)
    let mut val = Compensated::default();
    val.add(2.5);
    let mut d1x = Compensated::default();
    let mut d2 = Compensated::default();
    let mut c2 = Compensated::default();
    let mut d3x = Compensated::default();
    let mut absum = 2.5;
    let mut small = 0;
    let mut last: f64;
    let mut k = 1usize;
    loop {
        if k > TERM_CAP {
            return Err(Error::NonConvergence("X0 series exceeded term cap"));
        }
        let kf = 2.0 * k as f64;
        let t = a * pw;
        let tv = t * s;
        val.add(tv);
        d1x.add(kf * t);
        d2.add(kf * (kf - 1.0) * t);
        c2.add(kf * (kf - 2.0) * t);
        let t3 = kf * (kf - 1.0) * (kf - 2.0) * a * pw_prev;
        d3x.add(t3);
        absum += tv.abs() * (k as f64 + 2.0);
        last = tv.abs();
        let mags = [
            (tv, val.value()),
            (kf * t, d1x.value()),
            (kf * (kf - 1.0) * t, d2.value()),
            (kf * (kf - 2.0) * t, c2.value()),
            (t3, d3x.value()),
        ];
        if mags.iter().all(|(t, v)| t.abs() < tol * v.abs().max(1.0)) {
            small += 1;
        } else {
            small = 0;
        }
        if small >= 2 {
            break;
        }
        let (num, den) = next_coeff_den(k);
        a = a * num / den;
        pw_prev = pw;
        pw *= s;
        k += 1;
    }
    let d1_over_x = d1x.value();
    Ok(X0Eval {
        x,
        value: val.value(),
        d1: x * d1_over_x,
        d1_over_x,
        d2: d2.value(),
        d3: x * d3x.value(),
        d2_minus_d1_over_x: c2.value(),
        terms_used: k,
        est_error: EPS * absum + last,
    })
}

struct DdSeries {
    value: Dd,
    d1x: Dd,
    d2: Dd,
    c2: Dd,
    d3x: Dd,
    terms: usize,
    est: f64,
}

impl DdSeries {
    fn to_eval(&self, x: f64) -> X0Eval {
        let d1 = self.d1x.mul_f64(x).to_f64();
        X0Eval {
            x,
            value: self.value.to_f64(),
            d1,
            d1_over_x: self.d1x.to_f64(),
            d2: self.d2.to_f64(),
            d3: self.d3x.mul_f64(x).to_f64(),
            d2_minus_d1_over_x: self.c2.to_f64(),
            terms_used: self.terms,
            est_error: self.est,
        }
    }
}

fn series_dd(x: f64, tol: f64) -> Result<DdSeries> {
    let (sh, sl) = crate::dd::two_prod(x, x);
    let s = Dd { hi: sh, lo: sl };
    let mut a = Dd::from_f64(1.0);
    let mut pw = Dd::from_f64(1.0);
    let mut pw_prev = Dd::ZERO;
    let mut val = Dd::from_f64(2.5);
    let mut d1x = Dd::ZERO;
    let mut d2 = Dd::ZERO;
    let mut c2 = Dd::ZERO;
    let mut d3x = Dd::ZERO;
    let mut absum = 2.5;
    let mut small = 0;
    let mut last: f64;
    let mut k = 1usize;
    loop {
        if k > TERM_CAP {
            return Err(Error::NonConvergence("X0 series exceeded term cap"));
        }
        let kf = 2.0 * k as f64;
        let t = a * pw;
        let tv = t * s;
        let t1 = t.mul_f64(kf);
        let t2 = t.mul_f64(kf * (kf - 1.0));
        let tc = t.mul_f64(kf * (kf - 2.0));
        let t3 = (a * pw_prev).mul_f64(kf * (kf - 1.0) * (kf - 2.0));
        val = val + tv;
        d1x = d1x + t1;
        d2 = d2 + t2;
        c2 = c2 + tc;
        d3x = d3x + t3;
        absum += tv.hi.abs() * (k as f64 + 2.0);
        last = tv.hi.abs();
        let mags = [
            (tv.hi, val.hi),
            (t1.hi, d1x.hi),
            (t2.hi, d2.hi),
            (tc.hi, c2.hi),
            (t3.hi, d3x.hi),
        ];
        if mags.iter().all(|(t, v)| t.abs() < tol * v.abs().max(1.0)) {
            small += 1;
        } else {
            small = 0;
        }
        if small >= 2 {
            break;
        }
        let (num, den) = next_coeff_den(k);
        a = a.mul_f64(num).div_f64(den);
        pw_prev = pw;
        pw = pw * s;
        k += 1;
    }
    Ok(DdSeries {
        value: val,
        d1x,
        d2,
        c2,
        d3x,
        terms: k,
        est: DD_EPS * absum + last + EPS * val.hi.abs() * 0.5,
    })
}

/// Taylor coefficients of the solution through `(X, X', X'')` at `p > 0`.
fn taylor_coeffs(p: f64, jet: [Dd; 3], h: f64) -> (Vec<Dd>, usize) {
    let mut c: Vec<Dd> = Vec::with_capacity(TAYLOR_CAP + 3);
    c.push(jet[0]);
    c.push(jet[1]);
    c.push(jet[2].mul_f64(0.5));
    let get = |c: &Vec<Dd>, i: isize| -> Dd {
        if i < 0 {
            Dd::ZERO
        } else {
            c[i as usize]
        }
    };
    // D1(m) = (m+1) c_{m+1}, D2(m) = (m+1)(m+2) c_{m+2}, D3(m) = (m+1)(m+2)(m+3) c_{m+3}
    let d1 = |c: &Vec<Dd>, m: isize| -> Dd {
        if m < 0 {
            Dd::ZERO
        } else {
            get(c, m + 1).mul_f64((m + 1) as f64)
        }
    };
    let d2 = |c: &Vec<Dd>, m: isize| -> Dd {
        if m < 0 {
            Dd::ZERO
        } else {
            get(c, m + 2).mul_f64(((m + 1) * (m + 2)) as f64)
        }
    };
    let d3 = |c: &Vec<Dd>, m: isize| -> Dd {
        if m < 0 {
            Dd::ZERO
        } else {
            get(c, m + 3).mul_f64(((m + 1) * (m + 2) * (m + 3)) as f64)
        }
    };
    let p2 = p * p;
    let ah = h.abs();
    let mut small = 0;
    let mut n: isize = 0;
    while (n as usize) < TAYLOR_CAP {
        let rest = d3(&c, n - 1).mul_f64(8.0 * p)
            + d3(&c, n - 2).mul_f64(4.0)
            - d2(&c, n).mul_f64(4.0 * p)
            - d2(&c, n - 1).mul_f64(4.0)
            + d1(&c, n).mul_f64(4.0 * p2 + 9.0)
            + d1(&c, n - 1).mul_f64(8.0 * p)
            + d1(&c, n - 2).mul_f64(4.0)
            - get(&c, n).mul_f64(4.0 * p)
            - get(&c, n - 1).mul_f64(4.0);
        let den = 4.0 * p2 * ((n + 1) * (n + 2) * (n + 3)) as f64;
        let next = (-rest).div_f64(den);
        c.push(next);
        let m = (n + 3) as i32;
        let mag = next.hi.abs() * libm::pow(ah.max(1e-300), m as f64) * { let mf = m as f64; mf * mf * mf };
        if mag < 1e-34 * jet[0].hi.abs().max(1.0) || next.hi == 0.0 {
            small += 1;
        } else {
            small = 0;
        }
        if small >= 2 {
            break;
        }
        n += 1;
    }
    let used = c.len();
    (c, used)
}

/// Returns `(X, X', X'', X''')` at `p + h` together with a rounding estimate.
fn taylor_eval(c: &[Dd], h: f64) -> ([Dd; 4], f64) {
    let mut out = [Dd::ZERO; 4];
    let mut absum = 0.0;
    let mut hp = Dd::from_f64(1.0); // h^n
    let hd = Dd::from_f64(h);
    let mut powers: Vec<Dd> = Vec::with_capacity(c.len());
    for _ in 0..c.len() {
        powers.push(hp);
        hp = hp * hd;
    }
    for (n, cn) in c.iter().enumerate() {
        let nf = n as f64;
        out[0] = out[0] + *cn * powers[n];
        absum += (cn.hi * powers[n].hi).abs();
        if n >= 1 {
            out[1] = out[1] + (*cn * powers[n - 1]).mul_f64(nf);
        }
        if n >= 2 {
            out[2] = out[2] + (*cn * powers[n - 2]).mul_f64(nf * (nf - 1.0));
        }
        if n >= 3 {
            out[3] = out[3] + (*cn * powers[n - 3]).mul_f64(nf * (nf - 1.0) * (nf - 2.0));
        }
    }
    (out, DD_EPS * absum * 8.0)
}

struct Anchors {
    jets: Vec<[Dd; 3]>,
    est: Vec<f64>,
}

static ANCHORS: OnceBox<Anchors> = OnceBox::new();

fn anchors() -> &'static Anchors {
    ANCHORS.get_or_init(|| {
        let mut jets = Vec::with_capacity(ANCHOR_LAST + 1);
        let mut est = Vec::with_capacity(ANCHOR_LAST + 1);
        let s = series_dd(SERIES_LIMIT, 1e-33).expect("series at the first anchor converges");
        jets.push([s.value, s.d1x.mul_f64(SERIES_LIMIT), s.d2]);
        est.push(s.est - EPS * s.value.hi.abs() * 0.5);
        for j in 0..ANCHOR_LAST {
            let p = SERIES_LIMIT + j as f64;
            let (c, _) = taylor_coeffs(p, jets[j], 1.0);
            let (v, e) = taylor_eval(&c, 1.0);
            jets.push([v[0], v[1], v[2]]);
            est.push(est[j] + e);
        }
        Box::new(Anchors { jets, est })
    })
}

fn continued(x: f64) -> Result<X0Eval> {
    let tab = anchors();
    let rel = x - SERIES_LIMIT;
    let mut j = libm::round(rel) as usize;
    let mut jet;
    let mut est;
    let mut p;
    let mut terms = 0;
    if j > ANCHOR_LAST {
        // Beyond the table: chain unit steps in double-double.
        jet = tab.jets[ANCHOR_LAST];
        est = tab.est[ANCHOR_LAST];
        p = SERIES_LIMIT + ANCHOR_LAST as f64;
        while x - p > 0.5 {
            let (c, _) = taylor_coeffs(p, jet, 1.0);
            let (v, e) = taylor_eval(&c, 1.0);
            jet = [v[0], v[1], v[2]];
            est += e;
            p += 1.0;
        }
        j = usize::MAX;
    } else {
        jet = tab.jets[j];
        est = tab.est[j];
        p = SERIES_LIMIT + j as f64;
    }
    let _ = j;
    let h = x - p;
    let (c, used) = taylor_coeffs(p, jet, h);
    terms += used;
    let (v, e) = taylor_eval(&c, h);
    let value = v[0].to_f64();
    let d1 = v[1].to_f64();
    let d2 = v[2].to_f64();
    let d1_over_x = v[1].div_f64(x);
    Ok(X0Eval {
        x,
        value,
        d1,
        d1_over_x: d1_over_x.to_f64(),
        d2,
        d3: v[3].to_f64(),
        d2_minus_d1_over_x: (v[2] - d1_over_x).to_f64(),
        terms_used: terms,
        est_error: est + e + EPS * value.abs() * 0.5,
    })
}

// ---------------------------------------------------------------------------
// First integrals

/// Which solution of the third-order equation a first integral is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GKind {
    /// `X0` itself with `c = 0`; the integral equals `-5`.
    X0,
    /// `X1 = X0 + sqrt5 (x^2 + 5/2)` with `c = sqrt5`; the integral equals `20`.
    X1Sqrt5,
}

/// `G` for a solution given by its value, `X1'/x` and `X1''`:
/// `(X1'')^2 + 4c X1 + (1 + 9/(4x^2))(X1')^2 + ((2/x) X2 - 4cx) X1'`
/// with `X2 = -X1'' - X1 + c x^2`, rewritten in terms of `X1'/x` so that it
/// is regular at the origin.
pub fn g_integral(x: f64, c: f64, value: f64, d1_over_x: f64, d2: f64) -> f64 {
    let x2 = x * x;
    let x_2 = -d2 - value + c * x2;
    d2 * d2 + 4.0 * c * value + (x2 + 2.25) * d1_over_x * d1_over_x
        + (2.0 * x_2 - 4.0 * c * x2) * d1_over_x
}

pub fn g_first_integral(kind: GKind, x: f64) -> Result<f64> {
    let e = x0(x)?;
    Ok(match kind {
        GKind::X0 => g_integral(x, 0.0, e.value, e.d1_over_x, e.d2),
        GKind::X1Sqrt5 => g_integral(
            x,
            SQRT5,
            e.value + SQRT5 * (x * x + 2.5),
            e.d1_over_x + 2.0 * SQRT5,
            e.d2 + 2.0 * SQRT5,
        ),
    })
}

/// The equivalent form `(X0'' - X0'/x)^2 + (1 + 5/(4x^2))(X0')^2 - 2 X0 X0'/x`.
pub fn g_x0_alt(e: &X0Eval) -> f64 {
    let c = e.d2_minus_d1_over_x;
    let d = e.d1_over_x;
    c * c + (e.x * e.x + 1.25) * d * d - 2.0 * e.value * d
}

/// `H(y) = (Y' - 2cy)^2 + (Y - cy^2 + 2c)^2 - 4c^2`.
pub fn h_integral(y: f64, c: f64, value: f64, d1: f64) -> f64 {
    let p = d1 - 2.0 * c * y;
    let q = value - c * y * y + 2.0 * c;
    p * p + q * q - 4.0 * c * c
}

/// `H` for the partner `Y = sqrt5 (y^2 - 2)` of [`GKind::X1Sqrt5`]; equals `-20`.
pub fn h_first_integral_sqrt5(y: f64) -> f64 {
    h_integral(y, SQRT5, SQRT5 * (y * y - 2.0), 2.0 * SQRT5 * y)
}

// ---------------------------------------------------------------------------
// tau and friends

pub fn tau_from(e: &X0Eval) -> f64 {
    (e.value + e.d2) / e.x
}

/// `tau(x) = (X0 + X0'')/x`, for `x != 0`.
pub fn tau(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(domain("x", x));
    }
    Ok(tau_from(&x0(x)?))
}

/// `m(x) = sqrt(1 + 9/(4x^2))`.
pub fn m(x: f64) -> f64 {
    libm::sqrt(1.0 + 2.25 / (x * x))
}

/// `((1 + 9/(4x^2))^{-1/2} - 9/x^3) tau(x)`, the lower bound used to show
/// `tau > sqrt5` for large `x`.
pub fn tau_lower_bound_check(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("x", x));
    }
    Ok((1.0 / m(x) - 9.0 / (x * x * x)) * tau(x)?)
}

/// The limit `sqrt5 coth(sqrt5 pi / 4)` of `tau` at infinity.
pub fn tau_infinity() -> f64 {
    let z = SQRT5 * core::f64::consts::PI / 4.0;
    SQRT5 / libm::tanh(z)
}

/// `(X0'')^2 + m^2 (X0' - tau/m^2)^2 - ((tau/m)^2 - 5)`, identically zero.
pub fn oscillation_residual(x: f64) -> Result<f64> {
    let e = x0(x)?;
    let t = tau_from(&e);
    let mm = 1.0 + 2.25 / (x * x);
    let d = e.d1 - t / mm;
    Ok(e.d2 * e.d2 + mm * d * d - (t * t / mm - 5.0))
}

/// First point of a scan on `[x_lo, x_hi]` after which `(tau/m)^2 > 5` holds
/// at every scanned point.
pub fn find_t2(x_lo: f64, x_hi: f64, step: f64) -> Result<f64> {
    let mut candidate = None;
    let mut x = x_lo;
    while x <= x_hi {
        let t = tau(x)?;
        let r = t / m(x);
        if r * r > 5.0 {
            if candidate.is_none() {
                candidate = Some(x);
            }
        } else {
            candidate = None;
        }
        x += step;
    }
    candidate.ok_or(Error::NonConvergence("(tau/m)^2 - 5 never stays positive"))
}

// ---------------------------------------------------------------------------
// Scalars of the metric and the curvatures

/// `h(x, y) = 2 X0 - x X0' + y^2 X0'/x + sqrt5`.
pub fn h_from(e: &X0Eval, y: f64) -> f64 {
    2.0 * e.value - e.x * e.d1 + y * y * e.d1_over_x + SQRT5
}

pub fn h(x: f64, y: f64) -> Result<f64> {
    Ok(h_from(&x0(x)?, y))
}

/// `B2(x) = -X0'/(2x) - sqrt5`.
pub fn b2_from(e: &X0Eval) -> f64 {
    -0.5 * e.d1_over_x - SQRT5
}

/// `C2(x) = X0'' - X0'/x`.
pub fn c2_from(e: &X0Eval) -> f64 {
    e.d2_minus_d1_over_x
}

/// `B2^2 + C2^2`, always positive.
pub fn b2c2_sq_from(e: &X0Eval) -> f64 {
    let b = b2_from(e);
    let c = c2_from(e);
    b * b + c * c
}

/// The closed form `(X0'/x)(2X0 - xX0' - X0'/x + sqrt5)` of `B2^2 + C2^2`.
pub fn b2c2_sq_closed(e: &X0Eval) -> f64 {
    e.d1_over_x * (2.0 * e.value - e.x * e.d1 - e.d1_over_x + SQRT5)
}

fn s1(x: f64, y: f64) -> bool {
    x * y * (x * x - y * y) == 0.0
}

/// `B1 = -(X0 + sqrt5/2)/(x^2 - y^2) - sqrt5`.
pub fn b1_from(e: &X0Eval, y: f64) -> Result<f64> {
    let d = e.x * e.x - y * y;
    if d == 0.0 {
        return Err(Error::SingularInput {
            quantity: "B1",
            set: SingularSet::S1,
        });
    }
    Ok(-(e.value + 0.5 * SQRT5) / d - SQRT5)
}

/// `C1 = -2(X0 + sqrt5/2)/(x^2 - y^2)`.
pub fn c1_from(e: &X0Eval, y: f64) -> Result<f64> {
    let d = e.x * e.x - y * y;
    if d == 0.0 {
        return Err(Error::SingularInput {
            quantity: "C1",
            set: SingularSet::S1,
        });
    }
    Ok(-2.0 * (e.value + 0.5 * SQRT5) / d)
}

/// `kappa1 = 2y(X0 + sqrt5/2)/(x^2 - y^2)`.
pub fn kappa1_from(e: &X0Eval, y: f64) -> Result<f64> {
    let d = e.x * e.x - y * y;
    if d == 0.0 {
        return Err(Error::SingularInput {
            quantity: "kappa1",
            set: SingularSet::S1,
        });
    }
    Ok(2.0 * y * (e.value + 0.5 * SQRT5) / d)
}

/// `kappa2 = (1/y)((x^2 + y^2)/2 * X0'/x - (X0 + sqrt5/2))`.
pub fn kappa2_from(e: &X0Eval, y: f64) -> Result<f64> {
    if y == 0.0 {
        return Err(Error::SingularInput {
            quantity: "kappa2",
            set: SingularSet::S1,
        });
    }
    let x = e.x;
    Ok((0.5 * (x * x + y * y) * e.d1_over_x - (e.value + 0.5 * SQRT5)) / y)
}

/// `kappa3 = -y(2(X0 - xX0') + sqrt5)/(x^2 + y^2)`.
pub fn kappa3_from(e: &X0Eval, y: f64) -> Result<f64> {
    let r2 = e.x * e.x + y * y;
    if r2 == 0.0 {
        return Err(Error::SingularInput {
            quantity: "kappa3",
            set: SingularSet::S1,
        });
    }
    Ok(-y * (2.0 * (e.value - e.x * e.d1) + SQRT5) / r2)
}

/// `1/P = x h/(x^2 + y^2)`.
pub fn pinv_from(e: &X0Eval, y: f64) -> Result<f64> {
    let r2 = e.x * e.x + y * y;
    if r2 == 0.0 {
        return Err(Error::SingularInput {
            quantity: "Pinv",
            set: SingularSet::S1,
        });
    }
    Ok(e.x * h_from(e, y) / r2)
}

/// `(1/P)_z = ((x^2 - y^2)(X0 + sqrt5/2) + 2x y^2 X0')/(x^2 + y^2)^2 + sqrt5`.
pub fn pinv_z_from(e: &X0Eval, y: f64) -> Result<f64> {
    let x = e.x;
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return Err(Error::SingularInput {
            quantity: "Pinv_z",
            set: SingularSet::S1,
        });
    }
    Ok(((x * x - y * y) * (e.value + 0.5 * SQRT5) + 2.0 * x * y * y * e.d1) / (r2 * r2) + SQRT5)
}

/// `T(x) = (X0' + 2 sqrt5 x)(2X0 + sqrt5) / (4x X0' (2X0 - xX0' - X0'/x + sqrt5))`.
pub fn t_from(e: &X0Eval) -> Result<f64> {
    let x = e.x;
    if x == 0.0 {
        return Err(domain("x", x));
    }
    let num = (e.d1_over_x + 2.0 * SQRT5) * (2.0 * e.value + SQRT5);
    let den = 4.0 * x * e.d1_over_x * (2.0 * e.value - x * e.d1 - e.d1_over_x + SQRT5);
    Ok(num / den)
}

/// `q(x) = 2 (x/X0') sqrt(B2^2 + C2^2)`, regular at the origin.
pub fn q_from(e: &X0Eval) -> f64 {
    2.0 * libm::sqrt(b2c2_sq_from(e)) / e.d1_over_x
}

/// `w(x) = sqrt5 * int_0^x s/(2X0(s) - s X0'(s)) ds`.
pub fn w(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("x", x));
    }
    let q = quad::integrate(
        |s| {
            let e = x0(s)?;
            Ok(s / (2.0 * e.value - s * e.d1))
        },
        0.0,
        x,
        QUAD_TOL / SQRT5,
    )?;
    Ok(SQRT5 * q.value)
}

/// `w~(x) = (sqrt5/2) log x + int_0^x (T(s) - sqrt5/(2s)) ds`.
pub fn wtilde(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("x", x));
    }
    let q = quad::integrate(
        |s| {
            if s == 0.0 {
                return Ok(0.0);
            }
            let e = x0(s)?;
            Ok(t_from(&e)? - 0.5 * SQRT5 / s)
        },
        0.0,
        x,
        QUAD_TOL,
    )?;
    Ok(0.5 * SQRT5 * libm::log(x) + q.value)
}

// ---------------------------------------------------------------------------
// Quantities of the small-x asymptotics

/// `v2(x, y)`; tends to `sqrt5/2` at the origin.
pub fn v2_from(e: &X0Eval, y: f64) -> f64 {
    let x = e.x;
    let q = 5.0 + 4.0 * y * y;
    (q * (e.value + 0.5 * SQRT5) + SQRT5 * (x * x - y * y)) / (libm::sqrt(q) * h_from(e, y))
}

/// `v3(x, y) = 2 sqrt5 (x^2 - y^2) / h * sqrt((1 + y^2)/(5 + 4y^2))`.
pub fn v3_from(e: &X0Eval, y: f64) -> f64 {
    let x = e.x;
    2.0 * SQRT5 * (x * x - y * y) / h_from(e, y) * libm::sqrt((1.0 + y * y) / (5.0 + 4.0 * y * y))
}

/// `v2(0, y)`.
pub fn v2_at_origin(y: f64) -> f64 {
    let q = 5.0 + 4.0 * y * y;
    let h0 = 5.0 + SQRT5 + 2.0 * y * y;
    (q * (2.5 + 0.5 * SQRT5) - SQRT5 * y * y) / (libm::sqrt(q) * h0)
}

/// `v3(0, y)`.
pub fn v3_at_origin(y: f64) -> f64 {
    let h0 = 5.0 + SQRT5 + 2.0 * y * y;
    -2.0 * SQRT5 * y * y / h0 * libm::sqrt((1.0 + y * y) / (5.0 + 4.0 * y * y))
}

/// Bound on `|v2(x,y) - v2(0,y)|` valid for small `x`.
pub fn v2_deviation_bound(x: f64, y: f64, h: f64) -> f64 {
    let q = 5.0 + 4.0 * y * y;
    1.5 * (5.0 + SQRT5 + 4.0 * y * y) / libm::sqrt(q) * x * x / h
}

/// Bound on `|v3(x,y) - v3(0,y)|` valid for small `x`.
pub fn v3_deviation_bound(x: f64, y: f64, h: f64) -> f64 {
    let q = 5.0 + 4.0 * y * y;
    2.0 * SQRT5 / 7.0 * libm::sqrt((1.0 + y * y) / q) * x * x * (7.0 + y * y) / h
}

// ---------------------------------------------------------------------------

/// Every scalar of the construction at one point. Entries whose defining
/// expression is undefined at the point are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScalars {
    pub tau: f64,
    pub m: f64,
    pub h: f64,
    pub b1: f64,
    pub c1: f64,
    pub b2: f64,
    pub c2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub pinv: f64,
    pub pinv_z: f64,
    pub t: f64,
    pub q: f64,
    pub w: f64,
    pub wtilde: f64,
}

/// Computes all scalars; the integrals `w` and `w~` are only evaluated when
/// `with_integrals` is set since each costs an adaptive quadrature.
pub fn derived_scalars(x: f64, y: f64, tol: f64, with_integrals: bool) -> Result<DerivedScalars> {
    let e = eval_x0(x, tol)?;
    let nan = f64::NAN;
    let ok = |r: Result<f64>| r.unwrap_or(nan);
    let (w_, wt) = if with_integrals && x > 0.0 {
        (w(x)?, wtilde(x)?)
    } else {
        (nan, nan)
    };
    Ok(DerivedScalars {
        tau: if x != 0.0 { tau_from(&e) } else { nan },
        m: if x != 0.0 { m(x) } else { nan },
        h: h_from(&e, y),
        b1: ok(b1_from(&e, y)),
        c1: ok(c1_from(&e, y)),
        b2: b2_from(&e),
        c2: c2_from(&e),
        kappa1: ok(kappa1_from(&e, y)),
        kappa2: ok(kappa2_from(&e, y)),
        kappa3: ok(kappa3_from(&e, y)),
        pinv: ok(pinv_from(&e, y)),
        pinv_z: ok(pinv_z_from(&e, y)),
        t: ok(t_from(&e)),
        q: q_from(&e),
        w: w_,
        wtilde: wt,
    })
}

/// The defining function `(x^2 + y^2) X0' - (2X0 + sqrt5) x` of the excluded
/// curve S2, and its gradient norm.
pub fn s2_function(x: f64, y: f64) -> Result<(f64, f64)> {
    let e = x0(x)?;
    let r2 = x * x + y * y;
    let f = r2 * e.d1 - (2.0 * e.value + SQRT5) * x;
    let fx = 2.0 * x * e.d1 + r2 * e.d2 - 2.0 * e.d1 * x - (2.0 * e.value + SQRT5);
    let fy = 2.0 * y * e.d1;
    Ok((f, libm::sqrt(fx * fx + fy * fy)))
}

/// Whether `(x, y)` lies on S1.
pub fn on_s1(x: f64, y: f64) -> bool {
    s1(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 120-digit summation of the series.
    const REF: [(f64, f64, f64, f64, f64); 9] = [
        (0.5, 2.7470452858997215805, 0.97644783278136186123, 1.8597106720517060586, -0.55096641191076333421),
        (1.0, 3.4537383024842638353, 1.8176225754416629794, 1.4687045244228511983, -0.98483054327828964937),
        (3.0, 8.5108620645334626856, 2.509582183541615413, -0.60097502206063535122, -0.50034871526941015472),
        (10.0, 24.69245848331631043, 1.9954097185133269359, -0.70758836417114959362, 0.35818057473463929173),
        (24.5, 57.64287258421058906, 1.8704448844577209637, 0.62004007666410246583, 0.50062193636926790796),
        (30.0, 71.202067103873814027, 1.5809955813112766179, 0.093421798593398506565, 0.79156822648435227501),
        (50.0, 117.96822504573549032, 2.1465008722315322695, 0.7633369793509566477, 0.22619851748518829082),
        (80.0, 190.01631046280479, 1.5833729840073377109, -0.09898344165103860197, 0.790036949192394102),
        (100.0, 236.69994783181704662, 1.9625275466909270205, 0.68189980131535042674, 0.41084936094239149145),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for &(x, v, d1, d2, d3) in REF.iter() {
            let e = x0(x).unwrap();
            let scale = v.abs().max(1.0);
            assert!((e.value - v).abs() < 4e-15 * scale, "x={x}: {} vs {v}", e.value);
            assert!((e.d1 - d1).abs() < 4e-15 * scale, "x={x}: d1 {} vs {d1}", e.d1);
            assert!((e.d2 - d2).abs() < 4e-15 * scale, "x={x}: d2 {} vs {d2}", e.d2);
            assert!((e.d3 - d3).abs() < 1e-14 * scale, "x={x}: d3 {} vs {d3}", e.d3);
        }
    }

    #[test]
    fn origin_values() {
        let e = eval_x0(0.0, 1e-12).unwrap();
        assert_eq!(e.value, 2.5);
        assert_eq!(e.d1, 0.0);
        assert_eq!(e.d1_over_x, 2.0);
        assert_eq!(e.d2, 2.0);
        assert_eq!(e.d2_minus_d1_over_x, 0.0);
    }

    #[test]
    fn brute_force_sum_at_one() {
        // Independent: plain left-to-right sum of 60 terms from the recurrence.
        let mut a = 1.0f64;
        let mut sum = 2.5f64;
        for k in 1..60 {
            sum += a;
            let kf = k as f64;
            a *= -(2.0 * kf - 1.0) / (2.0 * (kf + 1.0) * (4.0 * kf * kf + 1.25));
        }
        let e = eval_x0(1.0, 1e-12).unwrap();
        assert!((e.value - sum).abs() < 1e-14);
        assert!((e.value - 3.4537).abs() < 1e-4);
        let second = -1.0 / 21.0;
        let third = 2.0 / 1449.0;
        assert!((e.value - (3.5 + second + third)).abs() < 1e-4);
    }

    #[test]
    fn cancellation_free_c2_near_origin() {
        let x = 1e-4;
        let e = x0(x).unwrap();
        assert!((e.d2_minus_d1_over_x / (x * x) + 8.0 / 21.0).abs() < 1e-8);
    }

    #[test]
    fn continuity_across_path_switches() {
        for &x in &[PLAIN_LIMIT, SERIES_LIMIT, SERIES_LIMIT + 0.5, SERIES_LIMIT + 10.5] {
            let a = x0(x - 1e-9).unwrap();
            let b = x0(x + 1e-9).unwrap();
            assert!((a.value - b.value).abs() < 1e-8);
            assert!((a.d2 - b.d2).abs() < 1e-8);
        }
    }

    #[test]
    fn domain_and_tolerance_errors() {
        assert!(matches!(x0(100.5), Err(Error::Domain { .. })));
        assert!(matches!(eval_x0(1.0, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(eval_x0(10.0, 1e-30), Err(Error::NonConvergence(_))));
        assert!(eval_x0_with(150.0, 1e-12, 200.0).is_ok());
    }

    #[test]
    fn first_integrals() {
        for &x in &[0.0, 0.7, 2.3, 9.9, 35.0, 99.0] {
            assert!((g_first_integral(GKind::X0, x).unwrap() + 5.0).abs() < 1e-9, "x={x}");
            assert!((g_first_integral(GKind::X1Sqrt5, x).unwrap() - 20.0).abs() < 1e-8, "x={x}");
            assert!((g_x0_alt(&x0(x).unwrap()) + 5.0).abs() < 1e-9);
        }
        assert!((h_first_integral_sqrt5(1.1) + 20.0).abs() < 1e-12);
    }

    #[test]
    fn tau_facts() {
        assert!(tau_lower_bound_check(10.0).unwrap() >= 2.35);
        let lim = SQRT5 * 1.0614;
        assert!((tau(80.0).unwrap() - lim).abs() < 0.01);
        assert!((tau_infinity() - lim).abs() < 1e-3);
        // tau x = 9/2 + (9/4) sum a_k/(4k^2+5/4) x^(2k)
        let x: f64 = 0.8;
        let mut a = 1.0f64;
        let mut s = 4.5f64;
        for k in 1..40 {
            let kf = k as f64;
            s += 2.25 * a / (4.0 * kf * kf + 1.25) * x.powi(2 * k);
            a *= -(2.0 * kf - 1.0) / (2.0 * (kf + 1.0) * (4.0 * kf * kf + 1.25));
        }
        assert!((tau(x).unwrap() * x - s).abs() < 1e-13);
    }

    #[test]
    fn h_and_b2c2_limits() {
        assert!((h(0.0, 0.0).unwrap() - (5.0 + SQRT5)).abs() < 1e-15);
        assert!((h(0.0, 1.5).unwrap() - (5.0 + SQRT5 + 4.5)).abs() < 1e-14);
        let e = x0(0.0).unwrap();
        assert!((b2c2_sq_from(&e) - (6.0 + 2.0 * SQRT5)).abs() < 1e-14);
        for &x in &[0.3, 2.0, 17.0, 60.0] {
            let e = x0(x).unwrap();
            assert!((b2c2_sq_from(&e) - b2c2_sq_closed(&e)).abs() < 1e-11);
        }
    }

    #[test]
    fn w_and_wtilde() {
        let w1 = w(1.0).unwrap();
        let w2 = w(2.0).unwrap();
        assert!(w1 > 0.0 && w2 > w1);
        let a = wtilde(1e-3).unwrap() - 0.5 * SQRT5 * libm::log(1e-3);
        let b = wtilde(1.0).unwrap();
        assert!((a - b).abs() < 1.0);
    }

    #[test]
    fn v_at_origin_has_norm_sqrt5_over_2() {
        for &y in &[0.0, 0.5, 1.0, 3.0] {
            let v2 = v2_at_origin(y);
            let v3 = v3_at_origin(y);
            assert!((libm::sqrt(v2 * v2 + v3 * v3) - 0.5 * SQRT5).abs() < 1e-15);
            let e = x0(0.0).unwrap();
            assert!((v2_from(&e, y) - v2).abs() < 1e-15);
        }
    }
}
