//! Finite trigonometric polynomials on [0, 2π] and their L_p norms.
//!
//! Norms use the unnormalized Lebesgue measure, so ‖cos νx‖₂ = √π and a
//! constant c has ‖c‖_p = |c|(2π)^{1/p}.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// a₀/2 + Σ_{ν=1}^{N} (a_ν cos νx + b_ν sin νx).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrigPoly")]
pub struct TrigPoly {
    a0_half: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrigPoly {
    a0_half: f64,
    #[serde(default)]
    a: Vec<f64>,
    #[serde(default)]
    b: Vec<f64>,
}

impl TryFrom<RawTrigPoly> for TrigPoly {
    type Error = Error;

    fn try_from(mut raw: RawTrigPoly) -> Result<Self> {
        if raw.a.is_empty() {
            raw.a = vec![0.0; raw.b.len()];
        }
        if raw.b.is_empty() {
            raw.b = vec![0.0; raw.a.len()];
        }
        TrigPoly::new(raw.a0_half, raw.a, raw.b)
    }
}

impl TrigPoly {
    /// Builds a polynomial from its constant term a₀/2 and coefficient lists
    /// a₁..a_N, b₁..b_N.
    pub fn new(a0_half: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                cos: a.len(),
                sin: b.len(),
            });
        }
        Ok(Self { a0_half, a, b })
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// The constant function c (stored as a₀/2 = c).
    pub fn constant(c: f64) -> Self {
        Self {
            a0_half: c,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    /// Zero constant term and the given cosine and sine lists, padded to a
    /// common length.
    pub fn from_coeffs(a: &[f64], b: &[f64]) -> Self {
        let n = a.len().max(b.len());
        let mut ca = a.to_vec();
        let mut cb = b.to_vec();
        ca.resize(n, 0.0);
        cb.resize(n, 0.0);
        Self {
            a0_half: 0.0,
            a: ca,
            b: cb,
        }
    }

    /// Sum of `(frequency, cos coefficient, sin coefficient)` terms; a
    /// frequency of 0 adds the cosine coefficient to the constant term.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (usize, f64, f64)>,
    {
        let mut f = Self::zero();
        for (k, ca, sb) in terms {
            f.add_term(k, ca, sb);
        }
        f
    }

    /// c·cos kx.
    pub fn cos(k: usize, c: f64) -> Self {
        Self::from_terms([(k, c, 0.0)])
    }

    /// c·sin kx.
    pub fn sin(k: usize, c: f64) -> Self {
        Self::from_terms([(k, 0.0, c)])
    }

    /// Adds c·cos kx + s·sin kx in place.
    pub fn add_term(&mut self, k: usize, c: f64, s: f64) {
        if k == 0 {
            self.a0_half += c;
            return;
        }
        if self.a.len() < k {
            self.a.resize(k, 0.0);
            self.b.resize(k, 0.0);
        }
        self.a[k - 1] += c;
        self.b[k - 1] += s;
    }

    pub fn a0_half(&self) -> f64 {
        self.a0_half
    }

    /// Cosine coefficients a₁..a_N.
    pub fn cos_coeffs(&self) -> &[f64] {
        &self.a
    }

    /// Sine coefficients b₁..b_N.
    pub fn sin_coeffs(&self) -> &[f64] {
        &self.b
    }

    /// a_k for k ≥ 1, zero beyond the stored length.
    pub fn a(&self, k: usize) -> f64 {
        if k == 0 {
            2.0 * self.a0_half
        } else {
            self.a.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    /// b_k for k ≥ 1, zero beyond the stored length and at k = 0.
    pub fn b(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.b.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    /// Stored length N of the coefficient lists.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Largest ν with (a_ν, b_ν) ≠ (0, 0), or 0.
    pub fn degree(&self) -> usize {
        (1..=self.a.len())
            .rev()
            .find(|&k| self.a[k - 1] != 0.0 || self.b[k - 1] != 0.0)
            .unwrap_or(0)
    }

    /// Copy with trailing zero pairs removed.
    pub fn trimmed(&self) -> Self {
        let d = self.degree();
        Self {
            a0_half: self.a0_half,
            a: self.a[..d].to_vec(),
            b: self.b[..d].to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a0_half == 0.0 && self.degree() == 0
    }

    /// Iterator over (k, a_k, b_k) for k = 1..N.
    pub fn harmonics(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(i, (&a, &b))| (i + 1, a, b))
    }

    /// Applies `g(k, a_k, b_k) -> (a'_k, b'_k)` to every harmonic and sets the
    /// constant term to `a0_half`.
    pub fn map_harmonics<F>(&self, a0_half: f64, mut g: F) -> Self
    where
        F: FnMut(usize, f64, f64) -> (f64, f64),
    {
        let mut a = Vec::with_capacity(self.a.len());
        let mut b = Vec::with_capacity(self.b.len());
        for (k, ak, bk) in self.harmonics() {
            let (na, nb) = g(k, ak, bk);
            a.push(na);
            b.push(nb);
        }
        Self { a0_half, a, b }
    }

    /// c·f.
    pub fn scaled(&self, c: f64) -> Self {
        self.map_harmonics(c * self.a0_half, |_, a, b| (c * a, c * b))
    }

    /// f(−x): sine coefficients change sign.
    pub fn reflected(&self) -> Self {
        self.map_harmonics(self.a0_half, |_, a, b| (a, -b))
    }

    /// a₀/2 + Σ (a_ν cos νx + b_ν sin νx).
    pub fn evaluate(&self, x: f64) -> f64 {
        let mut s = self.a0_half;
        for (k, a, b) in self.harmonics() {
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let (sn, cs) = (k as f64 * x).sin_cos();
            s += a * cs + b * sn;
        }
        s
    }

    /// f′(x).
    pub fn derivative_at(&self, x: f64) -> f64 {
        let mut s = 0.0;
        for (k, a, b) in self.harmonics() {
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let kf = k as f64;
            let (sn, cs) = (kf * x).sin_cos();
            s += kf * (b * cs - a * sn);
        }
        s
    }

    /// Antiderivative a₀/2·x + Σ (a_ν sin νx − b_ν cos νx)/ν.
    pub fn antiderivative_at(&self, x: f64) -> f64 {
        let mut s = self.a0_half * x;
        for (k, a, b) in self.harmonics() {
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let kf = k as f64;
            let (sn, cs) = (kf * x).sin_cos();
            s += (a * sn - b * cs) / kf;
        }
        s
    }

    /// (f(x), f′(x), antiderivative) with cos νx, sin νx from the angle
    /// addition recurrence.
    fn recurrence_eval(&self, x: f64) -> (f64, f64, f64) {
        let (s1, c1) = x.sin_cos();
        let (mut sn, mut cs) = (s1, c1);
        let (mut v, mut d, mut big) = (self.a0_half, 0.0, self.a0_half * x);
        for k in 1..=self.a.len() {
            let (a, b) = (self.a[k - 1], self.b[k - 1]);
            let kf = k as f64;
            v += a * cs + b * sn;
            d += kf * (b * cs - a * sn);
            big += (a * sn - b * cs) / kf;
            let next_c = cs * c1 - sn * s1;
            sn = sn * c1 + cs * s1;
            cs = next_c;
        }
        (v, d, big)
    }

    /// Values at x_j = 2πj/m, j = 0..m, computed with one FFT.
    pub fn sample(&self, m: usize) -> Vec<f64> {
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        if m == 0 {
            return Vec::new();
        }
        buf[0].re += self.a0_half;
        for (k, a, b) in self.harmonics() {
            buf[k % m] += Complex::new(a, -b);
        }
        fft_inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// (f(x) + f(−x))/2 and (f(x) − f(−x))/2.
    pub fn even_odd_parts(&self) -> (Self, Self) {
        let even = self.map_harmonics(self.a0_half, |_, a, _| (a, 0.0));
        let odd = self.map_harmonics(0.0, |_, _, b| (0.0, b));
        (even, odd)
    }

    /// Keeps the harmonics with lo ≤ ν ≤ hi (ν = 0 is the constant term).
    pub fn fourier_block(&self, lo: usize, hi: usize) -> Self {
        let a0 = if lo == 0 { self.a0_half } else { 0.0 };
        self.map_harmonics(a0, |k, a, b| {
            if k >= lo && k <= hi {
                (a, b)
            } else {
                (0.0, 0.0)
            }
        })
    }

    /// L_p norm with the default grid for this polynomial.
    pub fn norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p, &GridConfig::for_degree(self.degree()))
    }

    /// Σ harmonic amplitudes |a_ν| + |b_ν| (constant term included as |a₀/2|).
    pub fn coefficient_abs_sum(&self) -> f64 {
        self.a0_half.abs()
            + self
                .harmonics()
                .map(|(_, a, b)| a.abs() + b.abs())
                .sum::<f64>()
    }
}

fn combine(f: &TrigPoly, g: &TrigPoly, sign: f64) -> TrigPoly {
    let n = f.len().max(g.len());
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 1..=n {
        a.push(f.a(k) + sign * g.a(k));
        b.push(f.b(k) + sign * g.b(k));
    }
    TrigPoly {
        a0_half: f.a0_half + sign * g.a0_half,
        a,
        b,
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        combine(self, rhs, 1.0)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        combine(self, rhs, -1.0)
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: TrigPoly) -> TrigPoly {
        combine(&self, &rhs, 1.0)
    }
}

impl Sub for TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: TrigPoly) -> TrigPoly {
        combine(&self, &rhs, -1.0)
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scaled(-1.0)
    }
}

impl Neg for TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scaled(-1.0)
    }
}

impl Mul<&TrigPoly> for f64 {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        rhs.scaled(self)
    }
}

/// Uniform sampling grid on [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Number of sample points; a power of two.
    pub m: usize,
    /// Refine grid extrema (p = ∞) and integrate exactly between sign
    /// changes (p = 1).
    pub refine: bool,
    /// Relative tolerance for refined extrema.
    pub tol: f64,
}

impl GridConfig {
    /// Smallest power of two ≥ max(512, 8(N+1)), refinement on, tol 1e−8.
    pub fn for_degree(degree: usize) -> Self {
        Self::with_min_points(8 * (degree + 1))
    }

    /// Smallest power of two ≥ max(512, `min_points`).
    pub fn with_min_points(min_points: usize) -> Self {
        Self {
            m: min_points.max(512).next_power_of_two(),
            refine: true,
            tol: 1e-8,
        }
    }

    /// Checks the power-of-two and aliasing-guard invariants for `degree`.
    pub fn validate(&self, degree: usize) -> Result<()> {
        let required = (4 * (degree + 1)).next_power_of_two();
        if !self.m.is_power_of_two() || self.m < 4 * (degree + 1) {
            return Err(Error::GridTooCoarse {
                m: self.m,
                degree,
                required,
            });
        }
        Ok(())
    }

    /// Grid abscissae 2πj/m.
    pub fn points(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| TWO_PI * j as f64 / self.m as f64)
            .collect()
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::for_degree(0)
    }
}

/// ‖f‖_p on [0, 2π]: Parseval for p = 2, refined grid maximum for p = ∞,
/// rectangle rule otherwise (exact piecewise integration for p = 1 when
/// `g.refine` is set).
pub fn lp_norm(f: &TrigPoly, p: f64, g: &GridConfig) -> Result<f64> {
    check_exponent(p)?;
    if p == 2.0 {
        return Ok(parseval_norm(f));
    }
    g.validate(f.degree())?;
    if f.degree() == 0 {
        return Ok(constant_norm(f.a0_half, p));
    }
    let values = f.sample(g.m);
    if p.is_infinite() {
        if g.refine {
            Ok(refined_sup(f, &values, g.tol))
        } else {
            Ok(sup_abs(&values))
        }
    } else if p == 1.0 && g.refine {
        Ok(exact_l1(f, &values))
    } else {
        Ok(grid_norm(&values, p))
    }
}

/// Rectangle-rule ‖f‖_p on the grid (plain grid maximum for p = ∞).
pub fn quadrature_norm(f: &TrigPoly, p: f64, g: &GridConfig) -> Result<f64> {
    check_exponent(p)?;
    g.validate(f.degree())?;
    Ok(grid_norm(&f.sample(g.m), p))
}

/// (π(a₀²/2 + Σ(a_ν² + b_ν²)))^{1/2}.
pub fn parseval_norm(f: &TrigPoly) -> f64 {
    let s: f64 = f.harmonics().map(|(_, a, b)| a * a + b * b).sum();
    (PI * (2.0 * f.a0_half * f.a0_half + s)).sqrt()
}

fn constant_norm(c: f64, p: f64) -> f64 {
    if p.is_infinite() {
        c.abs()
    } else {
        c.abs() * TWO_PI.powf(1.0 / p)
    }
}

/// Discrete norm of grid samples: (2π/m Σ|v_j|^p)^{1/p}, or max |v_j|.
pub fn grid_norm(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    if p.is_infinite() {
        return sup_abs(values);
    }
    let w = TWO_PI / values.len() as f64;
    if p == 1.0 {
        return w * values.iter().map(|v| v.abs()).sum::<f64>();
    }
    if p == 2.0 {
        return (w * values.iter().map(|v| v * v).sum::<f64>()).sqrt();
    }
    let scale = sup_abs(values);
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = values.iter().map(|v| (v.abs() / scale).powf(p)).sum();
    scale * (w * s).powf(1.0 / p)
}

fn sup_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn refined_sup(f: &TrigPoly, values: &[f64], tol: f64) -> f64 {
    let m = values.len();
    let h = TWO_PI / m as f64;
    let grid_max = sup_abs(values);
    if grid_max == 0.0 {
        return 0.0;
    }
    let width_goal = (tol.max(1e-16).sqrt() * 0.1 / (f.degree() as f64 + 1.0)).max(1e-15);
    let mut best = grid_max;
    for i in 0..m {
        let v = values[i].abs();
        let prev = values[(i + m - 1) % m].abs();
        let next = values[(i + 1) % m].abs();
        if v < 0.5 * grid_max || v < prev || v < next {
            continue;
        }
        let s = values[i].signum();
        let slope = |x: f64| s * f.derivative_at(x);
        let xi = i as f64 * h;
        let (mut lo, mut hi) = (xi - h, xi + h);
        let (glo, ghi) = (slope(lo), slope(hi));
        let x_star = if glo >= 0.0 && ghi <= 0.0 {
            while hi - lo > width_goal {
                let mid = 0.5 * (lo + hi);
                if slope(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        } else {
            golden_max(|x| f.evaluate(x).abs(), lo, hi, width_goal)
        };
        best = best.max(f.evaluate(x_star).abs());
    }
    best
}

pub(crate) fn golden_max<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let r = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while hi - lo > width {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + r * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - r * (hi - lo);
            g1 = g(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Newton steps kept inside the sign-change bracket [lo, hi], bisecting
/// whenever a step would leave it.
fn bracketed_zero(f: &TrigPoly, mut lo: f64, mut hi: f64, v_lo: f64, v_hi: f64, width: f64) -> f64 {
    let s_lo = v_lo.signum();
    let mut x = lo + (hi - lo) * v_lo / (v_lo - v_hi);
    for _ in 0..100 {
        let (v, d, _) = f.recurrence_eval(x);
        if v == 0.0 {
            return x;
        }
        if v * s_lo > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / d;
        let next = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= width || hi - lo <= width {
            return next;
        }
        x = next;
    }
    x
}

/// ∫|f| by locating sign changes on the grid and summing antiderivative
/// increments between consecutive zeros.
fn exact_l1(f: &TrigPoly, values: &[f64]) -> f64 {
    let m = values.len();
    let h = TWO_PI / m as f64;
    let width_goal = 1e-9 * h;
    let mut zeros = Vec::new();
    for i in 0..m {
        let (v0, v1) = (values[i], values[(i + 1) % m]);
        if v0 == 0.0 {
            zeros.push(i as f64 * h);
        } else if v0 * v1 < 0.0 {
            zeros.push(bracketed_zero(
                f,
                i as f64 * h,
                (i + 1) as f64 * h,
                v0,
                v1,
                width_goal,
            ));
        }
    }
    let period_gain = f.a0_half * TWO_PI;
    if zeros.is_empty() {
        return period_gain.abs();
    }
    let big_f: Vec<f64> = zeros.iter().map(|&z| f.recurrence_eval(z).2).collect();
    let mut total = 0.0;
    for k in 0..zeros.len() {
        let next = if k + 1 < zeros.len() {
            big_f[k + 1]
        } else {
            big_f[0] + period_gain
        };
        total += (next - big_f[k]).abs();
    }
    total
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place Σ_k c_k e^{+2πi jk/m}.
pub(crate) fn fft_inverse(buf: &mut [Complex<f64>]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
}

/// In-place Σ_j v_j e^{−2πi jk/m}.
pub(crate) fn fft_forward(buf: &mut [Complex<f64>]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn poly(a0_half: f64, a: &[f64], b: &[f64]) -> TrigPoly {
        TrigPoly::new(a0_half, a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn evaluates_basic_cases() {
        assert_eq!(TrigPoly::cos(1, 1.0).evaluate(0.0), 1.0);
        assert_relative_eq!(
            TrigPoly::sin(2, 1.0).evaluate(PI / 4.0),
            1.0,
            epsilon = 1e-15
        );
        let k1 = poly(0.5, &[0.5], &[0.0]);
        assert_eq!(k1.evaluate(0.0), 1.0);
        let f = poly(0.3, &[1.0, -2.0], &[0.5, 0.25]);
        assert_relative_eq!(f.evaluate(1.1), f.evaluate(1.1 + TWO_PI), epsilon = 1e-12);
    }

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(TrigPoly::new(0.0, vec![1.0], vec![]).is_err());
        let parsed: std::result::Result<TrigPoly, _> =
            serde_json::from_str(r#"{"a0_half":0,"a":[1,2],"b":[1]}"#);
        assert!(parsed.is_err());
        let cos: TrigPoly = serde_json::from_str(r#"{"a0_half":0,"a":[0,1]}"#).unwrap();
        assert_eq!(cos, TrigPoly::cos(2, 1.0));
    }

    #[test]
    fn degree_ignores_trailing_zeros() {
        let f = poly(1.0, &[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0]);
        assert_eq!(f.degree(), 2);
        assert_eq!(TrigPoly::constant(3.0).degree(), 0);
        assert_eq!(f.trimmed().len(), 2);
    }

    #[test]
    fn norm_examples() {
        let c = TrigPoly::cos(1, 1.0);
        assert_relative_eq!(c.norm(2.0).unwrap(), PI.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(c.norm(f64::INFINITY).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.norm(1.0).unwrap(), 4.0, epsilon = 1e-12);
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            assert_eq!(TrigPoly::zero().norm(p).unwrap(), 0.0);
        }
        assert_relative_eq!(
            TrigPoly::constant(-2.0).norm(3.0).unwrap(),
            2.0 * TWO_PI.powf(1.0 / 3.0),
            epsilon = 1e-14
        );
    }

    #[test]
    fn rejects_small_exponent_and_coarse_grid() {
        let f = TrigPoly::cos(3, 1.0);
        assert!(matches!(f.norm(0.5), Err(Error::InvalidExponent(_))));
        let g = GridConfig {
            m: 8,
            refine: true,
            tol: 1e-8,
        };
        assert!(matches!(
            lp_norm(&f, 1.0, &g),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn sup_refinement_finds_off_grid_peak() {
        // Peak of cos(x − 0.001) sits off every grid point.
        let f = poly(0.0, &[0.001f64.cos()], &[0.001f64.sin()]);
        let g = GridConfig::for_degree(1);
        let refined = lp_norm(&f, f64::INFINITY, &g).unwrap();
        assert_relative_eq!(refined, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sample_matches_direct_evaluation() {
        let f = poly(0.25, &[1.0, 0.0, -0.5], &[0.0, 2.0, 0.125]);
        let m = 64;
        let v = f.sample(m);
        for (j, vj) in v.iter().enumerate() {
            let x = TWO_PI * j as f64 / m as f64;
            assert_relative_eq!(*vj, f.evaluate(x), epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_l1_matches_closed_form() {
        // ∫|cos x + cos 3x| over the period equals that of 2 cos 2x cos x.
        let f = poly(0.0, &[1.0, 0.0, 1.0], &[0.0, 0.0, 0.0]);
        let g = GridConfig::with_min_points(1 << 16);
        let fine = {
            let mut g2 = g;
            g2.refine = false;
            quadrature_norm(&f, 1.0, &g2).unwrap()
        };
        let exact = lp_norm(&f, 1.0, &GridConfig::for_degree(3)).unwrap();
        assert_relative_eq!(exact, fine, max_relative = 1e-8);
        // Constant-sign function: ∫|2 + cos x| = 4π.
        let h = poly(2.0, &[1.0], &[0.0]);
        assert_relative_eq!(h.norm(1.0).unwrap(), 4.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn parity_split_examples() {
        let (e, o) = poly(0.0, &[1.0], &[1.0]).even_odd_parts();
        assert_eq!(e, TrigPoly::cos(1, 1.0));
        assert_eq!(o, TrigPoly::sin(1, 1.0));
        let (e, o) = TrigPoly::cos(2, 1.0).even_odd_parts();
        assert_eq!(e, TrigPoly::cos(2, 1.0));
        assert!(o.is_zero());
        let (e, o) = TrigPoly::sin(3, 1.0).even_odd_parts();
        assert!(e.is_zero());
        assert_eq!(o, TrigPoly::sin(3, 1.0));
    }

    #[test]
    fn block_examples() {
        let f = TrigPoly::from_terms([(0, 1.0, 0.0), (1, 1.0, 0.0), (3, 1.0, 0.0)]);
        assert_eq!(f.fourier_block(1, 2).trimmed(), TrigPoly::cos(1, 1.0));
        assert_eq!(f.fourier_block(0, f.degree()), f);
        let g = TrigPoly::from_terms((1..=8).map(|k| (k, 1.0, 0.0)));
        let want = TrigPoly::from_terms([(3, 1.0, 0.0), (4, 1.0, 0.0)]);
        assert_eq!(g.fourier_block(3, 4).trimmed(), want);
    }

    #[test]
    fn json_round_trip() {
        let f = poly(0.1, &[1.0 / 3.0, -2.5e-300], &[PI, 0.0]);
        let s = serde_json::to_string(&f).unwrap();
        let g: TrigPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }

    fn coeffs(max_len: usize) -> impl Strategy<Value = TrigPoly> {
        (1..=max_len)
            .prop_flat_map(|n| {
                (
                    -2.0..2.0f64,
                    prop::collection::vec(-1.0..1.0f64, n),
                    prop::collection::vec(-1.0..1.0f64, n),
                )
            })
            .prop_map(|(c, a, b)| TrigPoly::new(c, a, b).unwrap())
    }

    proptest! {
        #[test]
        fn parseval_matches_quadrature(f in coeffs(24)) {
            let g = GridConfig::for_degree(f.degree());
            let q = quadrature_norm(&f, 2.0, &g).unwrap();
            let p = parseval_norm(&f);
            prop_assert!((q - p).abs() <= 1e-10 * p.max(1e-300));
        }

        #[test]
        fn normalized_norm_is_monotone_in_p(f in coeffs(12)) {
            let ps = [1.0, 1.5, 2.0, 4.0, f64::INFINITY];
            let mut last = 0.0;
            for p in ps {
                let v = f.norm(p).unwrap();
                let normalized = if p.is_infinite() { v } else { v / TWO_PI.powf(1.0 / p) };
                prop_assert!(normalized >= last * (1.0 - 1e-8));
                last = normalized;
            }
        }

        #[test]
        fn parity_parts_reconstruct(f in coeffs(10)) {
            let (e, o) = f.even_odd_parts();
            prop_assert_eq!(&e + &o, f);
        }

        #[test]
        fn block_is_idempotent_and_linear(f in coeffs(10), g in coeffs(10), lo in 0usize..5, w in 0usize..6) {
            let hi = lo + w;
            let once = f.fourier_block(lo, hi);
            prop_assert_eq!(once.fourier_block(lo, hi), once.clone());
            let sum = (&f + &g).fourier_block(lo, hi);
            let parts = &f.fourier_block(lo, hi) + &g.fourier_block(lo, hi);
            for k in 0..=sum.len() {
                prop_assert!((sum.a(k) - parts.a(k)).abs() <= 1e-15);
                prop_assert!((sum.b(k) - parts.b(k)).abs() <= 1e-15);
            }
        }
    }
}
