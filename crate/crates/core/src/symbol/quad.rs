//! Adaptive Gauss-Kronrod (7, 15) quadrature.

use crate::error::{NspError, Result};

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights at the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the per-panel `|K15 - G7|` estimates.
    pub error: f64,
    pub evaluations: usize,
}

fn panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrates `f` over `[a, b]`. A panel is accepted once its error estimate
/// is below `rel_tol` times the larger of its own magnitude and its share of
/// the coarse whole-interval estimate.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(NspError::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (coarse, _) = panel(&mut f, a, b);
    let mut evaluations = 15;
    if !coarse.is_finite() {
        return Err(NspError::Divergent("integrand is not finite".into()));
    }
    let density = coarse.abs() / (b - a);
    let mut value = 0.0;
    let mut error = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = panel(&mut f, lo, hi);
        evaluations += 15;
        if !(v.is_finite() && e.is_finite()) {
            return Err(NspError::Divergent(format!("integrand is not finite on [{lo}, {hi}]")));
        }
        let allowed = rel_tol * v.abs().max(density * (hi - lo));
        if e <= allowed || depth >= MAX_DEPTH || e == 0.0 {
            value += v;
            error += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(QuadResult { value, error, evaluations })
}
