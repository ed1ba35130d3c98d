//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use alloc::vec::Vec;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = hw * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok((kron * hw, ((kron - gauss) * hw).abs()))
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }
    let (v, e) = gk15(&mut f, a, b)?;
    let mut parts: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, v, e)];
    loop {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        if total_err <= abs_tol {
            break;
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::ToleranceNotMet { tol: abs_tol });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid)?;
        let (v2, e2) = gk15(&mut f, mid, hi)?;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut acc = crate::dd::Compensated::default();
    let mut err = 0.0;
    for p in &parts {
        acc.add(p.2);
        err += p.3;
    }
    Ok(Quadrature {
        value: acc.value(),
        abs_error: err,
        intervals: parts.len(),
    })
}
