//! Adaptive Gauss–Kronrod quadrature and semi-infinite integrals in a
//! logarithmic variable.

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod_pair<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
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
    (k * h, g * h)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> f64 {
    let (k, g) = whole;
    if !k.is_finite() || (k - g).abs() <= tol || depth == 0 || (b - a).abs() < 1e-300 {
        return k;
    }
    let m = 0.5 * (a + b);
    let left = kronrod_pair(f, a, m);
    let right = kronrod_pair(f, m, b);
    adapt(f, a, m, left, 0.5 * tol, depth - 1) + adapt(f, m, b, right, 0.5 * tol, depth - 1)
}

/// ∫_a^b f with the requested relative tolerance (absolute floor `abs_tol`).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let first = kronrod_pair(&f, a, b);
    let tol = (rel_tol * first.0.abs()).max(abs_tol);
    adapt(&f, a, b, first, tol, 40)
}

/// ∫_{y0}^∞ g(y) dy for a non-negative integrand decaying in y.
///
/// The range is swept in growing panels; what remains beyond the last panel
/// is estimated by the model g(y) ≈ g(Y)(y/Y)^{−q}, which is exact for
/// logarithmic majorants and conservative for exponentially decaying ones.
/// A local exponent q ≤ 1 is reported as divergence.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(g: F, y0: f64, rel_tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut y = y0;
    let mut width = 1.0;
    let y_cap = y0.max(0.0) + 4096.0;
    while y < y_cap {
        let piece = integrate(&g, y, y + width, rel_tol * 0.1, 0.0);
        total += piece;
        y += width;
        let gy = g(y).abs();
        if !total.is_finite() || !gy.is_finite() {
            return Err(Error::Divergent(format!(
                "integrand is unbounded near y = {y}"
            )));
        }
        if gy == 0.0 || (piece.abs() <= 1e-17 * total.abs() && gy * width <= 1e-17 * total.abs()) {
            return Ok(total);
        }
        width = (width * 2.0).min(256.0);
    }
    let tail = power_tail(&g, y)?;
    Ok(total + tail)
}

/// Remainder ∫_Y^∞ under the model g(y) ≈ g(Y)(y/Y)^{−q}, with q measured
/// between Y/2 and Y.
pub(crate) fn power_tail<F: Fn(f64) -> f64>(g: &F, y_end: f64) -> Result<f64> {
    let g1 = g(y_end);
    if g1 == 0.0 {
        return Ok(0.0);
    }
    let g0 = g(0.5 * y_end);
    let q = (g0.abs() / g1.abs()).ln() / std::f64::consts::LN_2;
    if q.is_nan() || q <= 1.0 {
        return Err(Error::Divergent(format!(
            "integrand decays like y^-{q:.3} at y = {y_end}"
        )));
    }
    Ok(g1 * y_end / (q - 1.0))
}
