//! Fractional differences Δ_h^α, fractional moduli of smoothness and the
//! realization functional.
//!
//! A harmonic (a − ib)e^{ikx} is mapped by Δ_h^α to (a − ib)m(k, h)e^{ikx}
//! with m(k, h) = Σ_j (−1)^j C(α, j) e^{i(α−j)kh} = e^{iαkh}(1 − e^{−ikh})^α.
//! The closed form is the exact sum of the binomial series; the truncated
//! series and the pointwise sum are kept as independent routes.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{check_exponent, invalid, Result};
use crate::transforms::{partial_sum, vallee_poussin, weyl_derivative};
use crate::trigpoly::{golden_max, lp_norm, GridConfig, TrigPoly};

/// Discretization of sup_{|h| ≤ δ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusConfig {
    /// Minimum number of uniformly spaced step values in (0, δ].
    pub h_samples: usize,
    /// Grid for the inner norm; `None` picks one from the degree.
    #[serde(default)]
    pub grid: Option<GridConfig>,
}

impl Default for ModulusConfig {
    fn default() -> Self {
        Self {
            h_samples: 64,
            grid: None,
        }
    }
}

impl ModulusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.h_samples < 16 {
            return Err(invalid("h_samples must be at least 16"));
        }
        Ok(())
    }
}

/// Generalized binomial coefficient C(α, ν).
pub fn binom_frac(alpha: f64, nu: usize) -> f64 {
    let mut c = 1.0;
    for j in 1..=nu {
        c *= (alpha - j as f64 + 1.0) / j as f64;
    }
    c
}

/// C(α, 0..=j_max) by the recurrence C(α, ν) = C(α, ν−1)(α − ν + 1)/ν.
pub fn binom_table(alpha: f64, j_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(j_max + 1);
    let mut c = 1.0;
    out.push(c);
    for j in 1..=j_max {
        c *= (alpha - j as f64 + 1.0) / j as f64;
        out.push(c);
    }
    out
}

fn integer_order(alpha: f64) -> Option<usize> {
    (alpha.fract() == 0.0 && alpha <= 64.0).then_some(alpha as usize)
}

/// m(k, h) = e^{iαkh}(2 sin(θ/2))^α e^{iα(π−θ)/2}, θ = kh mod 2π.
pub fn difference_multiplier(alpha: f64, k: usize, h: f64) -> Complex<f64> {
    if let Some(n) = integer_order(alpha) {
        return truncated_multiplier(&binom_table(alpha, n), alpha, k, h);
    }
    let kh = k as f64 * h;
    let theta = kh.rem_euclid(TAU);
    if theta == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    let modulus = (2.0 * (0.5 * theta).sin()).powf(alpha);
    Complex::from_polar(modulus, alpha * kh + 0.5 * alpha * (PI - theta))
}

/// Σ_{j≤J} (−1)^j C(α, j) e^{i(α−j)kh} with `binom` = C(α, 0..=J).
pub fn truncated_multiplier(binom: &[f64], alpha: f64, k: usize, h: f64) -> Complex<f64> {
    let kh = k as f64 * h;
    let mut s = Complex::new(0.0, 0.0);
    for (j, &c) in binom.iter().enumerate() {
        let sign = if j % 2 == 0 { c } else { -c };
        s += Complex::from_polar(sign, (alpha - j as f64) * kh);
    }
    s
}

fn apply_multiplier<F: Fn(usize) -> Complex<f64>>(f: &TrigPoly, a0_half: f64, m: F) -> TrigPoly {
    f.map_harmonics(a0_half, |k, a, b| {
        if a == 0.0 && b == 0.0 {
            return (0.0, 0.0);
        }
        let z = Complex::new(a, -b) * m(k);
        (z.re, -z.im)
    })
}

/// Δ_h^α f as a polynomial of the same degree; the constant term maps to 0.
pub fn fractional_difference(f: &TrigPoly, alpha: f64, h: f64) -> Result<TrigPoly> {
    check_order(alpha)?;
    Ok(apply_multiplier(f, 0.0, |k| {
        difference_multiplier(alpha, k, h)
    }))
}

/// Δ_h^α f with the binomial series cut after J terms; the constant term
/// keeps the partial sum a₀/2 Σ_{j≤J}(−1)^j C(α, j).
pub fn fractional_difference_truncated(
    f: &TrigPoly,
    alpha: f64,
    h: f64,
    terms: usize,
) -> Result<TrigPoly> {
    check_order(alpha)?;
    let binom = binom_table(alpha, terms);
    let constant: f64 = binom
        .iter()
        .enumerate()
        .map(|(j, c)| if j % 2 == 0 { *c } else { -*c })
        .sum();
    Ok(apply_multiplier(f, f.a0_half() * constant, |k| {
        truncated_multiplier(&binom, alpha, k, h)
    }))
}

/// Σ_{ν=0}^{J} (−1)^ν C(α, ν) f(x + (α − ν)h), summed pointwise.
pub fn fractional_difference_oracle(
    f: &TrigPoly,
    alpha: f64,
    h: f64,
    x: f64,
    terms: usize,
) -> Result<f64> {
    if terms < 1 {
        return Err(invalid("oracle needs J ≥ 1"));
    }
    let binom = binom_table(alpha, terms);
    Ok(binom
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let v = c * f.evaluate(x + (alpha - j as f64) * h);
            if j % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .sum())
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "difference order α = {alpha} must be positive"
        )))
    }
}

/// ‖Δ_h^α f‖_p; p = 2 uses |m(k, h)| = |2 sin(kh/2)|^α directly.
pub fn difference_norm(f: &TrigPoly, alpha: f64, h: f64, p: f64, grid: &GridConfig) -> Result<f64> {
    check_order(alpha)?;
    check_exponent(p)?;
    if p == 2.0 {
        return Ok(parseval_difference_norm(f, alpha, h));
    }
    lp_norm(&fractional_difference(f, alpha, h)?, p, grid)
}

fn parseval_difference_norm(f: &TrigPoly, alpha: f64, h: f64) -> f64 {
    let s: f64 = f
        .harmonics()
        .map(|(k, a, b)| {
            (a * a + b * b) * (2.0 * (0.5 * k as f64 * h).sin().abs()).powf(2.0 * alpha)
        })
        .sum();
    (PI * s).sqrt()
}

/// ω_α(f, δ)_p = sup_{|h| ≤ δ} ‖Δ_h^α f‖_p.
///
/// Steps h are sampled uniformly in (0, δ] with at least four samples per
/// period of the top harmonic, and every sampled local maximum within 10%
/// of the best is refined by golden-section search. Negative steps are
/// covered through the reflection f(−x), since Δ_{−h}^α f is the reflection
/// of Δ_h^α applied to f(−x).
pub fn modulus(f: &TrigPoly, alpha: f64, delta: f64, p: f64, cfg: &ModulusConfig) -> Result<f64> {
    check_order(alpha)?;
    check_exponent(p)?;
    cfg.validate()?;
    if !(delta > 0.0 && delta <= PI) {
        return Err(invalid(format!("δ = {delta} is outside (0, π]")));
    }
    let f = f.trimmed();
    let degree = f.degree();
    if degree == 0 {
        return Ok(0.0);
    }
    let grid = cfg.grid.unwrap_or_else(|| GridConfig::for_degree(degree));
    grid.validate(degree)?;
    let reflected = f.reflected();
    let both_signs = p != 2.0
        && integer_order(alpha).is_none()
        && reflected != f
        && reflected != -&f
        && f.harmonics()
            .filter(|(_, a, b)| *a != 0.0 || *b != 0.0)
            .count()
            > 1;
    let objective = |h: f64| -> f64 {
        let v = norm_unchecked(&f, alpha, h, p, &grid);
        if both_signs {
            v.max(norm_unchecked(&reflected, alpha, h, p, &grid))
        } else {
            v
        }
    };
    let samples = cfg
        .h_samples
        .max((4.0 * degree as f64 * delta / PI).ceil() as usize);
    let hs: Vec<f64> = (1..=samples)
        .map(|i| delta * i as f64 / samples as f64)
        .collect();
    let vals: Vec<f64> = hs.par_iter().map(|&h| objective(h)).collect();
    let mut best = vals.iter().cloned().fold(0.0_f64, f64::max);
    let step = delta / samples as f64;
    let candidates: Vec<usize> = (0..samples)
        .filter(|&i| {
            let left = if i == 0 { 0.0 } else { vals[i - 1] };
            let right = if i + 1 < samples {
                vals[i + 1]
            } else {
                f64::NEG_INFINITY
            };
            vals[i] >= left && vals[i] >= right && vals[i] >= 0.9 * best
        })
        .collect();
    let refined: Vec<f64> = candidates
        .par_iter()
        .map(|&i| {
            let lo = hs[i] - step;
            let hi = (hs[i] + step).min(delta);
            let x = golden_max(objective, lo.max(0.0), hi, 1e-7 * step);
            objective(x)
        })
        .collect();
    for v in refined {
        best = best.max(v);
    }
    Ok(best)
}

fn norm_unchecked(f: &TrigPoly, alpha: f64, h: f64, p: f64, grid: &GridConfig) -> f64 {
    if p == 2.0 {
        return parseval_difference_norm(f, alpha, h);
    }
    let d = apply_multiplier(f, 0.0, |k| difference_multiplier(alpha, k, h));
    lp_norm(&d, p, grid).expect("grid validated for this degree")
}

/// ω_α(f, δ_i)_p for each δ_i, made non-decreasing in δ by carrying the
/// running maximum (every step admissible for δ_i is admissible for larger δ).
pub fn modulus_curve(
    f: &TrigPoly,
    alpha: f64,
    deltas: &[f64],
    p: f64,
    cfg: &ModulusConfig,
) -> Result<Vec<f64>> {
    let raw: Vec<f64> = deltas
        .par_iter()
        .map(|&d| modulus(f, alpha, d, p, cfg))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..deltas.len()).collect();
    order.sort_by(|&i, &j| deltas[i].total_cmp(&deltas[j]));
    let mut out = raw.clone();
    let mut run = 0.0_f64;
    for i in order {
        run = run.max(raw[i]);
        out[i] = run;
    }
    Ok(out)
}

/// The linear mean used by the realization functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mean {
    /// de la Vallée-Poussin mean V_n.
    Vp,
    /// Partial sum S_n; only for 1 < p < ∞.
    Partial,
}

/// n^{−α}‖(M_n f)^{(α)}‖_p + ‖f − M_n f‖_p for the chosen mean M_n.
pub fn realization(f: &TrigPoly, alpha: f64, n: usize, p: f64, mean: Mean) -> Result<f64> {
    check_order(alpha)?;
    check_exponent(p)?;
    if n == 0 {
        return Err(invalid("realization needs n ≥ 1"));
    }
    let approx = match mean {
        Mean::Vp => vallee_poussin(f, n)?,
        Mean::Partial => {
            if p == 1.0 || p.is_infinite() {
                return Err(invalid("partial-sum realization needs 1 < p < ∞"));
            }
            partial_sum(f, n)
        }
    };
    let deriv = weyl_derivative(&approx, alpha)?;
    let first = (n as f64).powf(-alpha) * deriv.norm(p)?;
    let second = (f - &approx).norm(p)?;
    Ok(first + second)
}
