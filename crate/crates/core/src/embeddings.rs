//! Numeric and closed-form evaluation of the embedding conditions (1)–(8)
//! between Lipschitz classes H^p_{α+ρ}[ω] and Weyl–Nikolskii classes
//! W^{λ,β}_p, together with the integral and series functionals that bound
//! ω_α(φ, δ)_p by a modulus curve of f.
//!
//! Series conditions are judged from dyadic partial sums, ratio conditions
//! from LHS(n)/RHS(n) on a quarter-octave grid; see [`Verdict`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::ls_slope;
use crate::quad::{integrate, integrate_to_infinity, power_tail};
use crate::sequences::{
    almost_increasing_check, classify_derived, lambda_integral, Derived, Majorant,
    SequenceDescriptor, XiFunction,
};
use crate::transforms::half_pi_phase;

fn default_tau_margin() -> f64 {
    0.1
}

fn default_n_max() -> usize {
    4096
}

/// Inputs shared by the eight conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    #[serde(with = "crate::exponent")]
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    /// τ in r = ρ + τ·sign|sin((β−ρ)π/2)|.
    #[serde(default = "default_tau_margin")]
    pub tau_margin: f64,
    pub lambda: SequenceDescriptor,
    pub omega: Majorant,
    #[serde(default)]
    pub phi: Option<Majorant>,
    /// min(2, p); recomputed by [`EmbeddingParams::prepared`], any input
    /// value is discarded.
    #[serde(default, skip_deserializing)]
    pub theta: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

impl EmbeddingParams {
    pub fn new(
        p: f64,
        alpha: f64,
        beta: f64,
        rho: f64,
        lambda: SequenceDescriptor,
        omega: Majorant,
    ) -> Self {
        Self {
            p,
            alpha,
            beta,
            rho,
            tau_margin: default_tau_margin(),
            lambda,
            omega,
            phi: None,
            theta: p.min(2.0),
            n_max: default_n_max(),
        }
    }

    pub fn with_phi(mut self, phi: Majorant) -> Self {
        self.phi = Some(phi);
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    /// Copy with θ recomputed and n_max rounded down to a power of two.
    pub fn prepared(&self) -> Result<Self> {
        if !(self.p >= 1.0) {
            return Err(Error::InvalidExponent(self.p));
        }
        if !(self.alpha > 0.0)
            || !(self.rho >= 0.0)
            || !(self.tau_margin > 0.0)
            || !self.beta.is_finite()
        {
            return Err(invalid("need α > 0, ρ ≥ 0, τ > 0 and finite β"));
        }
        if self.n_max < 16 {
            return Err(invalid("n_max must be at least 16"));
        }
        let mut out = self.clone();
        out.theta = self.p.min(2.0);
        out.n_max = 1 << (usize::BITS - 1 - self.n_max.leading_zeros());
        Ok(out)
    }

    /// r = ρ + τ·sign|sin((β−ρ)π/2)|.
    pub fn r_exponent(&self) -> f64 {
        let (_, s) = half_pi_phase(self.beta - self.rho);
        if s == 0.0 {
            self.rho
        } else {
            self.rho + self.tau_margin
        }
    }

    fn phi_required(&self) -> Result<&Majorant> {
        self.phi
            .as_ref()
            .ok_or_else(|| invalid("this condition needs the majorant φ"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Values indexed by n.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Curve {
    pub n: Vec<usize>,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreconditionCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub condition_id: u8,
    pub lhs_curve: Curve,
    pub rhs_curve: Curve,
    pub partial_sums: Curve,
    pub ratio_sup: f64,
    pub slope_fit: f64,
    /// Slope of the log of the judged quantity against ln ln n.
    pub log_slope_fit: f64,
    pub verdict: Verdict,
    pub closed_form_verdict: Option<Verdict>,
    /// Estimate of every series tail dropped past the summation horizon.
    pub tail_remainder: f64,
    pub preconditions: Vec<PreconditionCheck>,
    pub notes: Vec<String>,
}

impl CriterionReport {
    /// The closed-form verdict when one exists, the numeric one otherwise.
    pub fn final_verdict(&self) -> Verdict {
        self.closed_form_verdict.unwrap_or(self.verdict)
    }

    pub fn preconditions_hold(&self) -> bool {
        self.preconditions.iter().all(|c| c.holds)
    }
}

const SERIES_LOG_SLOPE_HOLDS: f64 = -1.25;
const HOLDS_SLOPE: f64 = 0.02;
const FAILS_SLOPE: f64 = 0.10;
const TAIL_HORIZON: usize = 16;

/// Classification window covering the requested range with room for Δ².
fn class_range(n_max: usize) -> usize {
    n_max.max(16) + 2
}

/// λ non-decreasing and n^{−ρ}λ_n non-increasing; an error otherwise.
fn check_preamble(pr: &EmbeddingParams) -> Result<Vec<PreconditionCheck>> {
    let rep = classify_derived(
        &pr.lambda,
        class_range(pr.n_max),
        &[Derived::ScaledDown { rho: pr.rho }],
    )?;
    let inc = rep.lambda_class().is_increasing();
    let scaled = rep
        .find(|d| matches!(d, Derived::ScaledDown { .. }))
        .map(|c| c.is_decreasing())
        .unwrap_or(false);
    let lambda_positive = pr.lambda.eval(1)? > 0.0;
    if !(inc && scaled && lambda_positive) {
        return Err(Error::Precondition(format!(
            "λ must be positive and non-decreasing with n^(-ρ)λ_n non-increasing (non-decreasing: {inc}, scaled non-increasing: {scaled})"
        )));
    }
    Ok(vec![
        PreconditionCheck {
            name: "lambda non-decreasing".into(),
            holds: true,
        },
        PreconditionCheck {
            name: "n^(-rho) lambda_n non-increasing".into(),
            holds: true,
        },
    ])
}

fn exponent_check(id: u8, p: f64) -> PreconditionCheck {
    let interior = p > 1.0 && p.is_finite();
    let (name, holds) = if matches!(id, 1..=4) {
        ("1 < p < infinity", interior)
    } else {
        ("p in {1, infinity}", !interior)
    };
    PreconditionCheck {
        name: name.into(),
        holds,
    }
}

fn derived_class(pr: &EmbeddingParams, which: Derived) -> Result<crate::sequences::SequenceClass> {
    let rep = classify_derived(&pr.lambda, class_range(pr.n_max), &[which])?;
    Ok(rep
        .find(|d| *d == which)
        .expect("requested check is present"))
}

/// Shape preconditions on the derived majorants for conditions 5–8.
fn majorant_checks(pr: &EmbeddingParams, id: u8) -> Result<Vec<PreconditionCheck>> {
    let mut out = Vec::new();
    match id {
        5 | 6 => {
            let c = derived_class(pr, Derived::Lambda)?;
            out.push(PreconditionCheck {
                name: "delta^2 lambda_n of one sign".into(),
                holds: c.is_convex() || c.is_concave(),
            });
            if id == 6 {
                let r = pr.r_exponent();
                let c = derived_class(pr, Derived::OverPower { r })?;
                out.push(PreconditionCheck {
                    name: format!("delta^2 (lambda_n / n^r) >= 0 with r = {r}"),
                    holds: c.is_convex(),
                });
            }
        }
        7 | 8 => {
            let c = derived_class(pr, Derived::Reciprocal)?;
            out.push(PreconditionCheck {
                name: "delta^2 (1 / lambda_n) >= 0".into(),
                holds: c.is_convex(),
            });
            let (cb, sb) = half_pi_phase(pr.beta);
            if !(sb == 0.0 && cb.abs() == 1.0) {
                let t = almost_increasing_check(&pr.lambda, pr.n_max)?;
                out.push(PreconditionCheck {
                    name: "sum_{nu > n} 1/(nu lambda_nu) <= C / lambda_n".into(),
                    holds: t.tail_bounded(),
                });
            }
            if id == 8 {
                let r = pr.r_exponent();
                let c = derived_class(pr, Derived::PowerOver { r })?;
                out.push(PreconditionCheck {
                    name: format!("delta^2 (n^r / lambda_n) of one sign with r = {r}"),
                    holds: c.is_convex() || c.is_concave(),
                });
            }
        }
        _ => {}
    }
    Ok(out)
}

/// Remainder Σ_{ν>N} t_ν estimated from the power fitted to the last octave
/// of `terms` (one-based, N = terms.len() − 1): t_N·N/(q−1), or ∞ when q ≤ 1.
fn fitted_tail(terms: &[f64]) -> f64 {
    let big_n = terms.len() - 1;
    let tail = &terms[big_n / 2..];
    if tail.iter().all(|&t| t == 0.0) {
        return 0.0;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = (big_n / 2..=big_n)
        .filter(|&n| terms[n] > 0.0)
        .map(|n| ((n as f64).ln(), terms[n].ln()))
        .unzip();
    match ls_slope(&xs, &ys) {
        Some(s) if -s > 1.0 => terms[big_n] * big_n as f64 / (-s - 1.0),
        _ => f64::INFINITY,
    }
}

/// n = round(2^{k/4}) for k ≥ 0, deduplicated, up to n_max.
fn quarter_octave_grid(n_max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut k = 0;
    loop {
        let n = 2f64.powf(k as f64 / 4.0).round() as usize;
        if n > n_max {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
        k += 1;
    }
    if out.last() != Some(&n_max) {
        out.push(n_max);
    }
    out
}

fn window_slopes(ns: &[usize], vals: &[f64], lo: usize, hi: usize) -> Option<(f64, f64)> {
    let (mut x1, mut x2, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for (&n, &v) in ns.iter().zip(vals) {
        if n >= lo && n <= hi {
            if !(v > 0.0) || !v.is_finite() {
                return None;
            }
            let ln = (n as f64).ln();
            x1.push(ln);
            x2.push(ln.ln());
            y.push(v.ln());
        }
    }
    Some((ls_slope(&x1, &y)?, ls_slope(&x2, &y)?))
}

/// Verdict for a ratio LHS/RHS sampled on `ns` (ascending, last = n_max).
fn ratio_verdict(ns: &[usize], ratio: &[f64], n_max: usize) -> (Verdict, f64, f64, Vec<String>) {
    let mut notes = Vec::new();
    let sup = ratio.iter().cloned().fold(0.0_f64, f64::max);
    if ratio.iter().any(|r| !r.is_finite()) {
        notes.push("ratio is not finite on the grid".into());
        return (Verdict::Inconclusive, f64::NAN, f64::NAN, notes);
    }
    let tail: Vec<f64> = ns
        .iter()
        .zip(ratio)
        .filter(|(n, _)| **n >= n_max / 4)
        .map(|(_, r)| *r)
        .collect();
    if tail.iter().all(|&r| r == 0.0) {
        return (Verdict::Holds, 0.0, 0.0, notes);
    }
    let Some((s1, s2)) = window_slopes(ns, ratio, n_max / 4, n_max) else {
        notes.push("ratio vanishes on part of the fit window".into());
        return (Verdict::Inconclusive, f64::NAN, f64::NAN, notes);
    };
    let octave_a = window_slopes(ns, ratio, n_max / 4, n_max / 2).map(|s| s.0);
    let octave_b = window_slopes(ns, ratio, n_max / 2, n_max).map(|s| s.0);
    let sustained =
        matches!((octave_a, octave_b), (Some(a), Some(b)) if a >= FAILS_SLOPE && b >= FAILS_SLOPE);
    let verdict = if sustained {
        Verdict::Fails
    } else if sup.is_finite() && s1 <= HOLDS_SLOPE && s2 <= HOLDS_SLOPE {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    (verdict, s1, s2, notes)
}

/// Verdict for a series from its dyadic block increments I_k = S(2^{k+1}) − S(2^k).
fn series_verdict(increments: &[f64], total: f64) -> (Verdict, f64, f64, Vec<String>) {
    let mut notes = Vec::new();
    let k_len = increments.len();
    let window = &increments[k_len - 3..];
    if window.iter().all(|&v| v == 0.0) && total.is_finite() {
        return (Verdict::Holds, 0.0, 0.0, notes);
    }
    if window.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        notes.push("block increments change sign or vanish in the fit window".into());
        return (Verdict::Inconclusive, f64::NAN, f64::NAN, notes);
    }
    let ks: Vec<usize> = (k_len - 3..k_len).collect();
    let y: Vec<f64> = window.iter().map(|v| v.ln()).collect();
    let x1: Vec<f64> = ks
        .iter()
        .map(|&k| k as f64 * std::f64::consts::LN_2)
        .collect();
    let x2: Vec<f64> = ks.iter().map(|&k| (k as f64 + 0.5).ln()).collect();
    let s1 = ls_slope(&x1, &y).unwrap_or(f64::NAN);
    let s2 = ls_slope(&x2, &y).unwrap_or(f64::NAN);
    let pair = |i: usize| (y[i + 1] - y[i]) / std::f64::consts::LN_2;
    let verdict = if pair(0) >= FAILS_SLOPE && pair(1) >= FAILS_SLOPE {
        Verdict::Fails
    } else if total.is_finite() && s1 <= HOLDS_SLOPE && s2 <= SERIES_LOG_SLOPE_HOLDS {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    (verdict, s1, s2, notes)
}

/// Conditions (1) (1 < p < ∞) and (5) (p = 1, ∞).
pub fn condition_series(params: &EmbeddingParams, id: u8) -> Result<CriterionReport> {
    if id != 1 && id != 5 {
        return Err(invalid(format!("condition {id} is not a series condition")));
    }
    let pr = params.prepared()?;
    let mut pre = check_preamble(&pr)?;
    pre.push(exponent_check(id, pr.p));
    pre.extend(majorant_checks(&pr, id)?);
    let n_max = pr.n_max;
    let lambda = pr.lambda.values(n_max + 1)?;
    let w = |n: usize| pr.omega.eval(1.0 / n as f64);
    let mut terms = vec![0.0; n_max + 1];
    if id == 1 {
        let th = pr.theta;
        for n in 1..=n_max {
            terms[n] = (lambda[n + 1].powf(th) - lambda[n].powf(th)) * w(n).powf(th);
        }
    } else {
        let (c, s) = half_pi_phase(pr.beta);
        let (c, s) = (c.abs(), s.abs());
        for n in 1..=n_max {
            let mut t = 0.0;
            if c != 0.0 {
                t += c * (lambda[n + 1] - lambda[n]) * w(n);
            }
            if s != 0.0 {
                t += s * lambda[n] * w(n) / n as f64;
            }
            terms[n] = t;
        }
    }
    let mut sums = Curve::default();
    let mut increments = Curve::default();
    let mut acc = 0.0;
    let mut prev = 0.0;
    let mut next = 1;
    for (n, &t) in terms.iter().enumerate().skip(1) {
        acc += t;
        if n == next {
            sums.n.push(n);
            sums.value.push(acc);
            if n > 1 {
                increments.n.push(n / 2);
                increments.value.push(acc - prev);
            }
            prev = acc;
            next *= 2;
        }
    }
    let tail = fitted_tail(&terms);
    let total = acc + tail;
    let (verdict, s1, s2, mut notes) = series_verdict(&increments.value, total);
    if !tail.is_finite() {
        notes.push("fitted summand power gives a divergent tail".into());
    }
    let closed = closed_form_verdict(&pr, id);
    Ok(CriterionReport {
        condition_id: id,
        lhs_curve: increments,
        rhs_curve: Curve::default(),
        partial_sums: sums,
        ratio_sup: total,
        slope_fit: s1,
        log_slope_fit: s2,
        verdict,
        closed_form_verdict: closed,
        tail_remainder: tail,
        preconditions: pre,
        notes,
    })
}

/// Conditions (2), (3), (4) (1 < p < ∞) and (6), (7), (8) (p = 1, ∞).
pub fn condition_ratio(params: &EmbeddingParams, id: u8) -> Result<CriterionReport> {
    if !matches!(id, 2 | 3 | 4 | 6 | 7 | 8) {
        return Err(invalid(format!("condition {id} is not a ratio condition")));
    }
    let pr = params.prepared()?;
    let mut pre = check_preamble(&pr)?;
    pre.push(exponent_check(id, pr.p));
    pre.extend(majorant_checks(&pr, id)?);
    let n_max = pr.n_max;
    let grid = quarter_octave_grid(n_max);
    let w = |n: usize| pr.omega.eval(1.0 / n as f64);
    let mut lhs = Vec::with_capacity(grid.len());
    let mut rhs = Vec::with_capacity(grid.len());
    let mut tail_remainder = 0.0;
    match id {
        3 | 7 => {
            for &n in &grid {
                lhs.push(1.0 / pr.lambda.eval(n)?);
                rhs.push(w(n));
            }
        }
        4 | 8 => {
            let phi = pr.phi_required()?;
            for &n in &grid {
                lhs.push(phi.eval(1.0 / n as f64) / pr.lambda.eval(n)?);
                rhs.push(w(n));
            }
        }
        _ => {
            let phi = pr.phi_required()?;
            let (vals, tail) = braces_curve(&pr, id, &grid)?;
            tail_remainder = tail;
            lhs = vals;
            for &n in &grid {
                rhs.push(phi.eval(1.0 / (n + 1) as f64));
            }
        }
    }
    let ratio: Vec<f64> = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| {
            if *r > 0.0 {
                l / r
            } else if *l == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let sup = ratio.iter().cloned().fold(0.0_f64, f64::max);
    let (verdict, s1, s2, notes) = ratio_verdict(&grid, &ratio, n_max);
    Ok(CriterionReport {
        condition_id: id,
        lhs_curve: Curve {
            n: grid.clone(),
            value: lhs,
        },
        rhs_curve: Curve {
            n: grid,
            value: rhs,
        },
        partial_sums: Curve::default(),
        ratio_sup: sup,
        slope_fit: s1,
        log_slope_fit: s2,
        verdict,
        closed_form_verdict: closed_form_verdict(&pr, id),
        tail_remainder,
        preconditions: pre,
        notes,
    })
}

/// The braces of (2) raised to 1/θ, or the four-term sum of (6), on `grid`.
/// Tails run to 16·n_max directly and beyond by the fitted summand power.
fn braces_curve(pr: &EmbeddingParams, id: u8, grid: &[usize]) -> Result<(Vec<f64>, f64)> {
    let n_max = pr.n_max;
    let lambda_len = match &pr.lambda.family {
        crate::sequences::SequenceFamily::Table { values } => {
            values.len().min(pr.lambda.n_max_hint)
        }
        _ => usize::MAX,
    };
    let horizon = (TAIL_HORIZON * n_max).min(lambda_len.saturating_sub(1));
    if horizon < n_max + 2 {
        return Err(Error::TableOutOfRange {
            index: n_max + 3,
            len: lambda_len,
        });
    }
    let lambda = pr.lambda.values(horizon + 1)?;
    let w: Vec<f64> = (0..=horizon + 1)
        .map(|n| {
            if n == 0 {
                f64::NAN
            } else {
                pr.omega.eval(1.0 / n as f64)
            }
        })
        .collect();
    let (s, r, c_w, s_w) = if id == 2 {
        (pr.theta, pr.rho, 1.0, 0.0)
    } else {
        let (c, sn) = half_pi_phase(pr.beta);
        (1.0, pr.r_exponent(), c.abs(), sn.abs())
    };
    let a = pr.alpha;
    // head_ν = ν^{(r+α)s}(ν^{−rs}λ_ν^s − (ν+1)^{−rs}λ_{ν+1}^s)ω^s(1/ν)
    let mut head_prefix = vec![0.0; horizon + 1];
    for nu in 1..=horizon {
        let x = nu as f64;
        let d =
            x.powf(-r * s) * lambda[nu].powf(s) - (x + 1.0).powf(-r * s) * lambda[nu + 1].powf(s);
        head_prefix[nu] = head_prefix[nu - 1] + x.powf((r + a) * s) * d * w[nu].powf(s);
    }
    let mut tail_terms = vec![0.0; horizon + 1];
    for nu in 1..=horizon {
        let mut t = c_w * (lambda[nu + 1].powf(s) - lambda[nu].powf(s)) * w[nu].powf(s);
        if s_w != 0.0 {
            t += s_w * lambda[nu] * w[nu] / nu as f64;
        }
        tail_terms[nu] = t;
    }
    let beyond = fitted_tail(&tail_terms);
    let mut suffix = vec![0.0; horizon + 2];
    for nu in (1..=horizon).rev() {
        suffix[nu] = suffix[nu + 1] + tail_terms[nu];
    }
    let out = grid
        .iter()
        .map(|&n| {
            let head = (n as f64).powf(-a * s) * head_prefix[n];
            let rest = if n + 2 <= horizon { suffix[n + 2] } else { 0.0 } + beyond;
            let last = lambda[n + 1].powf(s) * w[n + 1].powf(s);
            (head + rest + last).powf(1.0 / s)
        })
        .collect();
    Ok((out, beyond))
}

fn first_difference_converges(r: f64, big_a: f64, a: f64, b: f64, theta: f64) -> bool {
    if r == 0.0 && big_a == 0.0 {
        return true;
    }
    if r == 0.0 {
        return a > 0.0 || b > big_a;
    }
    a > r || (a == r && (b - big_a) * theta > 1.0)
}

fn over_n_converges(r: f64, big_a: f64, a: f64, b: f64) -> bool {
    a > r || (a == r && b - big_a > 1.0)
}

/// Comparison-test verdict for λ_n = n^r ln^A(n+1), ω(δ) = δ^a(1+ln 1/δ)^{−b}
/// and, for (4)/(8), φ(δ) = δ^c(1+ln 1/δ)^{−d}. `None` for other families and
/// for conditions (2) and (6).
///
/// (1): Σ n^{(r−a)θ−1} ln^{(A−b)θ} n < ∞ iff a > r, or a = r and (b−A)θ > 1;
/// for r = 0 the difference is A θ ln^{Aθ−1}n / n and the sum converges iff
/// a > 0 or b > A. (5) applies the same test with θ = 1 to the cosine
/// branch and Σ n^{r−a−1} ln^{A−b} n to the sine branch. (3)/(7): the ratio
/// n^{a−r} ln^{b−A} n is bounded iff a < r, or a = r and b ≤ A. (4)/(8): the
/// ratio n^{a−c−r} ln^{b−d−A} n is bounded iff a < c+r, or a = c+r and b ≤ d+A.
pub fn closed_form_verdict(params: &EmbeddingParams, id: u8) -> Option<Verdict> {
    let (r, big_a) = params.lambda.power_log_exponents()?;
    let (a, b) = params.omega.power_log_exponents()?;
    let theta = params.p.min(2.0);
    let holds = match id {
        1 => first_difference_converges(r, big_a, a, b, theta),
        5 => {
            let (c, s) = half_pi_phase(params.beta);
            (c == 0.0 || first_difference_converges(r, big_a, a, b, 1.0))
                && (s == 0.0 || over_n_converges(r, big_a, a, b))
        }
        3 | 7 => a < r || (a == r && b <= big_a),
        4 | 8 => {
            let (c, d) = params.phi.as_ref()?.power_log_exponents()?;
            a < c + r || (a == c + r && b <= d + big_a)
        }
        _ => return None,
    };
    Some(if holds {
        Verdict::Holds
    } else {
        Verdict::Fails
    })
}

/// Dispatch to [`condition_series`] or [`condition_ratio`].
pub fn check_condition(params: &EmbeddingParams, id: u8) -> Result<CriterionReport> {
    match id {
        1 | 5 => condition_series(params, id),
        2 | 3 | 4 | 6 | 7 | 8 => condition_ratio(params, id),
        _ => Err(invalid(format!("condition id {id} is not in 1..8"))),
    }
}

/// A modulus curve (t_i, ω_i) on a log-spaced grid reaching t = 1,
/// interpolated log-linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    pub t: Vec<f64>,
    pub omega: Vec<f64>,
}

impl ModulusCurve {
    pub fn new(t: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if t.len() != omega.len() || t.len() < 2 {
            return Err(invalid(
                "modulus curve needs at least two equally long columns",
            ));
        }
        if t.windows(2).any(|w| !(w[0] < w[1])) || !(t[0] > 0.0) {
            return Err(invalid(
                "modulus curve t-grid must be positive and strictly increasing",
            ));
        }
        if *t.last().unwrap() < 1.0 - 1e-12 {
            return Err(invalid("modulus curve must reach t = 1"));
        }
        let zero = omega.iter().all(|&w| w == 0.0);
        if !zero && omega.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(invalid(
                "modulus curve must be positive or identically zero",
            ));
        }
        if omega.windows(2).any(|w| w[1] < w[0] * (1.0 - 1e-9)) {
            return Err(invalid("modulus curve must be non-decreasing"));
        }
        Ok(Self { t, omega })
    }

    /// ω sampled on `points` log-spaced nodes of [t_min, 1].
    pub fn from_majorant(w: &Majorant, t_min: f64, points: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min < 1.0) || points < 2 {
            return Err(invalid("need 0 < t_min < 1 and at least two points"));
        }
        let t = crate::sequences::log_grid(t_min, 1.0, points);
        let omega = t.iter().map(|&x| w.eval(x)).collect();
        Self::new(t, omega)
    }

    fn is_zero(&self) -> bool {
        self.omega.iter().all(|&w| w == 0.0)
    }

    /// ln ω at ln t = u, log-linear inside the grid and along the first or
    /// last segment outside it.
    fn ln_omega(&self, u: f64) -> f64 {
        let n = self.t.len();
        let i = match self.t.partition_point(|&t| t.ln() <= u) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (u0, u1) = (self.t[i].ln(), self.t[i + 1].ln());
        let (y0, y1) = (self.omega[i].ln(), self.omega[i + 1].ln());
        y0 + (u - u0) / (u1 - u0) * (y1 - y0)
    }

    /// ω(t) by interpolation.
    pub fn eval(&self, t: f64) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.ln_omega(t.ln()).exp()
        }
    }
}

/// Which functional to evaluate. `Tau` and `Theta` select the exponent
/// τ = max(2, p) or θ = min(2, p) where the display leaves a choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// (∫_0^δ t^{−rτ−1} ω^τ dt)^{1/τ}.
    Weyl1Lower,
    /// (∫_0^δ t^{−rθ−1} ω^θ dt)^{1/θ}.
    Weyl1Upper,
    /// {∫_0^δ t^{−(r−ε)τ−1}ω^τ + δ^{ατ}∫_δ^1 t^{−(r−ε+α)τ−1}ω^τ}^{1/τ}.
    Weyl4,
    /// The same with θ.
    Weyl5,
    /// (∫_0^δ t^{−(r+ε)τ−1} ω^τ_{r+α}(f) dt)^{1/τ}.
    Weyl2Lhs,
    /// δ^{α−ε}(∫_δ^1 t^{−(α−ε)θ−1} ω^θ_α(f^{(r+ε)}) dt)^{1/θ}; the curve is
    /// the modulus of the derivative.
    Weyl2Rhs,
    /// δ^{α−ε}(∫_δ^1 t^{−(α−ε)τ−1} ω^τ_α(f^{(r+ε)}) dt)^{1/τ}.
    Weyl3Lhs,
    /// (∫_0^δ t^{−(r+ε)θ−1} ω^θ_{r+α}(f) dt)^{1/θ}.
    Weyl3Rhs,
    /// (∫_0^1 ξ(t) ω^s dt)^{1/s}; also I₃.
    I1,
    /// {∫_0^δ t^{−rs−1}∫_0^t u^{rs}ξ ω^s dt + δ^{αs}∫_δ^1 t^{−αs−1}∫_t^1 ξ ω^s dt}^{1/s}.
    I2,
    /// {δ^{(r+α)τ}Λ^τ(s,r,δ)∫_δ^1 t^{−(r+α)τ−1}Λ^{−τ}(s,r,t) ω^τ dt}^{1/τ};
    /// the curve is ω_{r+α₁}(φ).
    I4,
    /// Λ(s,r,δ)ω(δ) + {∫_0^δ t^{−rθ−1}∫_0^t u^{rθ}ξ ω^θ dt}^{1/θ}.
    I5,
    /// ∫_0^δ t^{−2r−1}ln^{−2|A|}(2/t)ω² + δ^{2α}∫_δ^1 t^{−2(r+α)−1}ln^{−1−2|A|}(2/t)ω².
    HhjRhs,
    /// δ^{2α}ln^{2A}(2/δ)∫_δ^1 t^{−2α−1}ln^{−1−2A}(2/t)ω² + ω²(δ); the curve
    /// is ω_α(φ).
    HjLhs,
    /// ∫_0^δ t^{−2r−1}ln^{2A}(2/t)ω² dt.
    HjRhs,
    /// {λ_1^θ‖f‖^θ + Σ_n (λ_{n+1}^θ − λ_n^θ)ω^θ(1/n)}^{1/θ}.
    T1,
    /// {λ_1^θ ω^θ(1) + Σ_n (λ_{n+1}^θ − λ_n^θ)ω^θ(1/n)}^{1/θ}.
    T2,
    /// `T1` with τ.
    R5,
    /// `T2` with τ.
    R6,
    /// {Σ_{ν>n} ν^{rθ−1}ω^θ(1/ν)}^{1/θ}.
    B3Upper,
    /// {Σ_{ν>n} ν^{rτ−1}ω^τ(1/ν)}^{1/τ}.
    B3Lower,
}

/// Parameters of [`integral_functional`]. Sum functionals use n = round(1/δ)
/// (kept in floating point for the block sums).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    #[serde(with = "crate::exponent")]
    pub p: f64,
    pub alpha: f64,
    pub r: f64,
    pub delta: f64,
    #[serde(default)]
    pub eps: f64,
    /// A in the logarithmic weights of `Hhj`/`Hj`.
    #[serde(default)]
    pub log_power: f64,
    #[serde(default)]
    pub xi: Option<XiFunction>,
    /// s of the Λ(s, r, t) family; defaults to θ.
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub lambda: Option<SequenceDescriptor>,
    /// ρ of the series functionals `T2`/`R6`.
    #[serde(default)]
    pub rho: f64,
    /// ‖f‖_p for `T1`/`R5`.
    #[serde(default)]
    pub norm: f64,
}

impl FunctionalParams {
    pub fn new(p: f64, alpha: f64, r: f64, delta: f64) -> Self {
        Self {
            p,
            alpha,
            r,
            delta,
            eps: 0.0,
            log_power: 0.0,
            xi: None,
            s: None,
            lambda: None,
            rho: 0.0,
            norm: 0.0,
        }
    }

    fn theta(&self) -> f64 {
        self.p.min(2.0)
    }

    fn tau(&self) -> f64 {
        self.p.max(2.0)
    }

    fn xi(&self) -> Result<&XiFunction> {
        self.xi
            .as_ref()
            .ok_or_else(|| invalid("this functional needs ξ"))
    }

    fn lambda(&self) -> Result<&SequenceDescriptor> {
        self.lambda
            .as_ref()
            .ok_or_else(|| invalid("this functional needs λ"))
    }
}

const FUNCTIONAL_TOL: f64 = 1e-11;

/// ∫ g(t) ω^s(t) dt over [lo, hi] ⊂ [t_0, 1], segment by segment in u = ln t.
fn curve_integral<G: Fn(f64) -> f64>(curve: &ModulusCurve, s: f64, lo: f64, hi: f64, g: &G) -> f64 {
    let (ulo, uhi) = (lo.ln(), hi.ln());
    if !(uhi > ulo) {
        return 0.0;
    }
    let mut cuts: Vec<f64> = vec![ulo];
    for &t in &curve.t {
        let u = t.ln();
        if u > ulo && u < uhi {
            cuts.push(u);
        }
    }
    cuts.push(uhi);
    let f = |u: f64| {
        let t = u.exp();
        g(t) * (s * curve.ln_omega(u) + u).exp()
    };
    cuts.windows(2)
        .map(|c| integrate(f, c[0], c[1], FUNCTIONAL_TOL, 0.0))
        .sum()
}

/// ∫_0^δ t^{−m s−1} L(t) ω^s(t) dt, where L is a slowly varying weight.
/// Below the first node the integrand is continued as the exponential in
/// ln t measured on the first segment; a non-decaying continuation is
/// reported as divergence.
fn near_integral<L: Fn(f64) -> f64>(
    curve: &ModulusCurve,
    m: f64,
    s: f64,
    delta: f64,
    weight: &L,
) -> Result<f64> {
    let t0 = curve.t[0];
    let g = |t: f64| t.powf(-m * s - 1.0) * weight(t);
    let h = |u: f64| g(u.exp()) * (s * curve.ln_omega(u) + u).exp();
    let (u0, u1) = (t0.ln(), curve.t[1].ln());
    let kappa = (h(u1) / h(u0)).ln() / (u1 - u0);
    if !(kappa > 0.0) {
        return Err(Error::Divergent(format!(
            "integrand behaves like t^{:.3} below the grid; need an exponent above -1",
            kappa - 1.0
        )));
    }
    if delta <= t0 {
        return Ok(h(delta.ln()) / kappa);
    }
    Ok(curve_integral(curve, s, t0, delta, &g) + h(u0) / kappa)
}

/// ∫_δ^1 t^{−m s−1} L(t) ω^s(t) dt.
fn far_integral<L: Fn(f64) -> f64>(
    curve: &ModulusCurve,
    m: f64,
    s: f64,
    delta: f64,
    weight: &L,
) -> Result<f64> {
    if delta < curve.t[0] {
        return Err(invalid("δ lies below the modulus curve grid"));
    }
    let g = |t: f64| t.powf(-m * s - 1.0) * weight(t);
    Ok(curve_integral(curve, s, delta, 1.0, &g))
}

/// ∫_0^t u^{q} ξ(u) du through u = t e^{−z}.
fn xi_near(xi: &XiFunction, q: f64, t: f64) -> Result<f64> {
    let v = integrate_to_infinity(
        |z: f64| (-(q + 1.0) * z).exp() * xi.eval(t * (-z).exp()),
        0.0,
        1e-10,
    )?;
    Ok(t.powf(q + 1.0) * v)
}

/// ∫_t^1 ξ(u) du through u = e^{−y}.
fn xi_far(xi: &XiFunction, t: f64) -> f64 {
    if t >= 1.0 {
        return 0.0;
    }
    integrate(
        |y: f64| xi.eval((-y).exp()) * (-y).exp(),
        0.0,
        -t.ln(),
        1e-10,
        0.0,
    )
}

/// Σ_{ν>n} ν^{q} ω^s(1/ν): 4096 terms directly, the rest as ∫ in y = ln ν
/// over the grid and the y-power model G(Y)(y/Y)^{−k} beyond it.
fn b3_sum(curve: &ModulusCurve, q: f64, s: f64, n: f64) -> Result<f64> {
    const DIRECT: f64 = 4096.0;
    let om = |nu: f64| curve.eval(1.0 / nu);
    let y_max = -curve.t[0].ln();
    let mut total = 0.0;
    let mut nu = n + 1.0;
    if n < 1e12 {
        while nu <= n + DIRECT && nu.ln() < y_max {
            total += nu.powf(q) * om(nu).powf(s);
            nu += 1.0;
        }
    }
    let y0 = (nu - 0.5).ln();
    let big_g = |y: f64| (q * y + s * curve.ln_omega(-y) + y).exp();
    if y0 < y_max {
        for w in split_range(y0, y_max, 64).windows(2) {
            total += integrate(big_g, w[0], w[1], FUNCTIONAL_TOL, 0.0);
        }
    }
    let tail = power_tail(&big_g, y_max.max(y0))?;
    Ok(total + tail)
}

fn split_range(a: f64, b: f64, pieces: usize) -> Vec<f64> {
    (0..=pieces)
        .map(|i| a + (b - a) * i as f64 / pieces as f64)
        .collect()
}

/// Weighted series of moduli with exponent s; `with_norm` adds the norm term.
fn weighted_series(
    curve: &ModulusCurve,
    fp: &FunctionalParams,
    s: f64,
    with_norm: bool,
    n: usize,
) -> Result<f64> {
    let lambda = fp.lambda()?;
    let cap = ((1.0 / curve.t[0]).floor() as usize).min(1 << 16);
    let horizon = cap.max(n + 2).max(16);
    let lam = lambda.values(horizon + 1)?;
    let om = |nu: usize| curve.eval(1.0 / nu as f64);
    let mut diff_terms = vec![0.0; horizon + 1];
    for nu in 1..=horizon {
        diff_terms[nu] = (lam[nu + 1].powf(s) - lam[nu].powf(s)) * om(nu).powf(s);
    }
    let beyond = if curve.is_zero() {
        0.0
    } else {
        fitted_tail(&diff_terms)
    };
    if with_norm {
        let sum: f64 = diff_terms.iter().sum::<f64>() + beyond;
        return Ok((lam[1].powf(s) * fp.norm.powf(s) + sum).powf(1.0 / s));
    }
    let (a, rho) = (fp.alpha, fp.rho);
    let mut head = 0.0;
    for nu in 1..=n {
        let x = nu as f64;
        let d = x.powf(-rho * s) * lam[nu].powf(s) - (x + 1.0).powf(-rho * s) * lam[nu + 1].powf(s);
        head += x.powf((rho + a) * s) * d * om(nu).powf(s);
    }
    head *= (n as f64).powf(-a * s);
    let rest: f64 = diff_terms.iter().skip(n + 2).sum::<f64>() + beyond;
    let last = lam[n + 1].powf(s) * om(n).powf(s);
    Ok((head + rest + last).powf(1.0 / s))
}

/// Evaluates the named functional on a modulus curve. Returns the
/// displayed quantity: the `Hhj`/`Hj` sides are squared moduli, every other
/// functional is on the scale of a modulus.
pub fn integral_functional(
    which: Functional,
    curve: &ModulusCurve,
    fp: &FunctionalParams,
) -> Result<f64> {
    crate::error::check_exponent(fp.p)?;
    let delta = fp.delta;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("δ = {delta} is outside (0, 1]")));
    }
    if curve.is_zero() {
        return Ok(0.0);
    }
    let (th, ta, r, a, eps) = (fp.theta(), fp.tau(), fp.r, fp.alpha, fp.eps);
    let one = |_: f64| 1.0;
    let root = |v: f64, s: f64| v.powf(1.0 / s);
    let n_real = (1.0 / delta).round().max(1.0);
    let n = n_real.min(usize::MAX as f64 / 4.0) as usize;
    Ok(match which {
        Functional::Weyl1Lower => root(near_integral(curve, r, ta, delta, &one)?, ta),
        Functional::Weyl1Upper => root(near_integral(curve, r, th, delta, &one)?, th),
        Functional::Weyl4 | Functional::Weyl5 => {
            let s = if which == Functional::Weyl4 { ta } else { th };
            let near = near_integral(curve, r - eps, s, delta, &one)?;
            let far = far_integral(curve, r - eps + a, s, delta, &one)?;
            root(near + delta.powf(a * s) * far, s)
        }
        Functional::Weyl2Lhs => root(near_integral(curve, r + eps, ta, delta, &one)?, ta),
        Functional::Weyl3Rhs => root(near_integral(curve, r + eps, th, delta, &one)?, th),
        Functional::Weyl2Rhs | Functional::Weyl3Lhs => {
            let s = if which == Functional::Weyl2Rhs {
                th
            } else {
                ta
            };
            delta.powf(a - eps) * root(far_integral(curve, a - eps, s, delta, &one)?, s)
        }
        Functional::I1 => {
            let s = fp.s.unwrap_or(th);
            let xi = fp.xi()?;
            root(
                near_integral(curve, 0.0, s, 1.0, &|t: f64| t * xi.eval(t))?,
                s,
            )
        }
        Functional::I2 => {
            let s = fp.s.unwrap_or(th);
            let xi = fp.xi()?;
            let inner_near = |t: f64| xi_near(xi, r * s, t).unwrap_or(f64::NAN);
            let near = near_integral(curve, r, s, delta, &inner_near)?;
            let far = far_integral(curve, a, s, delta, &|t: f64| xi_far(xi, t))?;
            let v = near + delta.powf(a * s) * far;
            if !v.is_finite() {
                return Err(Error::Divergent(
                    "u^(rs) ξ(u) is not integrable near 0".into(),
                ));
            }
            root(v, s)
        }
        Functional::I4 => {
            let s = fp.s.unwrap_or(th);
            let xi = fp.xi()?;
            let big = |t: f64| lambda_integral(xi, r, s, t).unwrap_or(f64::NAN);
            let far = far_integral(curve, r + a, ta, delta, &|t: f64| big(t).powf(-ta))?;
            let v = delta.powf((r + a) * ta) * big(delta).powf(ta) * far;
            if !v.is_finite() {
                return Err(Error::Divergent("Λ(s, r, t) is not finite".into()));
            }
            root(v, ta)
        }
        Functional::I5 => {
            let s = fp.s.unwrap_or(th);
            let xi = fp.xi()?;
            let first = lambda_integral(xi, r, s, delta)? * curve.eval(delta);
            let inner = |t: f64| xi_near(xi, r * th, t).unwrap_or(f64::NAN);
            let v = near_integral(curve, r, th, delta, &inner)?;
            if !v.is_finite() {
                return Err(Error::Divergent(
                    "u^(rθ) ξ(u) is not integrable near 0".into(),
                ));
            }
            first + root(v, th)
        }
        Functional::HhjRhs => {
            let big_a = fp.log_power.abs();
            let near = near_integral(curve, r, 2.0, delta, &|t: f64| {
                (2.0 / t).ln().powf(-2.0 * big_a)
            })?;
            let far = far_integral(curve, r + a, 2.0, delta, &|t: f64| {
                (2.0 / t).ln().powf(-1.0 - 2.0 * big_a)
            })?;
            near + delta.powf(2.0 * a) * far
        }
        Functional::HjLhs => {
            let big_a = fp.log_power;
            let far = far_integral(curve, a, 2.0, delta, &|t: f64| {
                (2.0 / t).ln().powf(-1.0 - 2.0 * big_a)
            })?;
            delta.powf(2.0 * a) * (2.0 / delta).ln().powf(2.0 * big_a) * far
                + curve.eval(delta).powi(2)
        }
        Functional::HjRhs => {
            let big_a = fp.log_power;
            near_integral(curve, r, 2.0, delta, &|t: f64| {
                (2.0 / t).ln().powf(2.0 * big_a)
            })?
        }
        Functional::T1 => weighted_series(curve, fp, th, true, n)?,
        Functional::R5 => weighted_series(curve, fp, ta, true, n)?,
        Functional::T2 => weighted_series(curve, fp, th, false, n)?,
        Functional::R6 => weighted_series(curve, fp, ta, false, n)?,
        Functional::B3Upper => root(b3_sum(curve, r * th - 1.0, th, n_real)?, th),
        Functional::B3Lower => root(b3_sum(curve, r * ta - 1.0, ta, n_real)?, ta),
    })
}

/// Slope of ln F(δ) against ln ln(1/δ) over the given δ values.
pub fn log_log_inverse_slope(deltas: &[f64], values: &[f64]) -> Option<f64> {
    let xs: Vec<f64> = deltas.iter().map(|d| (1.0 / d).ln().ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    ls_slope(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(p: f64, lambda: SequenceDescriptor, omega: Majorant) -> EmbeddingParams {
        EmbeddingParams::new(p, 1.0, 1.0, 1.0, lambda, omega)
    }

    #[test]
    fn theta_is_recomputed() {
        let json = r#"{"p":4,"alpha":1,"beta":0,"rho":1,"theta":7,
            "lambda":{"family":"power_log","r":1.0},"omega":{"family":"power_log","a":1.5}}"#;
        let pr: EmbeddingParams = serde_json::from_str(json).unwrap();
        assert_eq!(pr.prepared().unwrap().theta, 2.0);
        assert_eq!(pr.tau_margin, 0.1);
    }

    #[test]
    fn series_examples() {
        let pr = params(2.0, SequenceDescriptor::power(1.0), Majorant::power(1.5));
        let rep = condition_series(&pr, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert_eq!(rep.closed_form_verdict, Some(Verdict::Holds));
        assert!(rep.tail_remainder.is_finite());
        let pr = params(2.0, SequenceDescriptor::power(1.0), Majorant::power(0.75));
        assert_eq!(condition_series(&pr, 1).unwrap().verdict, Verdict::Fails);

        let mut pr = params(2.0, SequenceDescriptor::constant(3.0), Majorant::power(0.5));
        pr.rho = 0.0;
        let rep = condition_series(&pr, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert_eq!(*rep.partial_sums.value.last().unwrap(), 0.0);

        let mut pr = params(
            f64::INFINITY,
            SequenceDescriptor::power(1.0),
            Majorant::power(1.5),
        );
        pr.beta = 0.0;
        let rep = condition_series(&pr, 5).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.preconditions_hold());
    }

    #[test]
    fn preamble_failure_is_an_error() {
        let mut pr = params(2.0, SequenceDescriptor::power(2.0), Majorant::power(1.5));
        pr.rho = 1.0;
        assert!(matches!(
            condition_series(&pr, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn ratio_examples() {
        let pr = params(2.0, SequenceDescriptor::power(1.0), Majorant::power(0.5));
        let rep = condition_ratio(&pr, 3).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert_relative_eq!(rep.ratio_sup, 1.0, epsilon = 1e-15);
        assert_eq!(rep.closed_form_verdict, Some(Verdict::Holds));

        let pr = params(2.0, SequenceDescriptor::power(1.0), Majorant::power(1.0));
        let rep = condition_ratio(&pr, 3).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert_eq!(rep.closed_form_verdict, Some(Verdict::Holds));

        let pr = params(2.0, SequenceDescriptor::power(1.0), Majorant::power(1.5));
        assert_eq!(condition_ratio(&pr, 3).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn condition_four_with_constructed_phi() {
        let n_max = 256;
        let lambda = SequenceDescriptor::power_log(1.0, 0.5);
        let omega = Majorant::power(1.5);
        let ns: Vec<usize> = (1..=n_max).rev().collect();
        let delta: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        let vals: Vec<f64> = ns
            .iter()
            .map(|&n| omega.eval(1.0 / n as f64) * lambda.eval(n).unwrap())
            .collect();
        let phi = Majorant::table(delta, vals).unwrap();
        let mut pr = params(2.0, lambda, omega).with_phi(phi).with_n_max(n_max);
        pr.rho = 1.5;
        let rep = condition_ratio(&pr, 4).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        for v in rep.lhs_curve.value.iter().zip(&rep.rhs_curve.value) {
            assert_relative_eq!(*v.0 / *v.1, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn condition_two_exact_power() {
        let rho = 1.0;
        let alpha = 0.5;
        let mut pr = EmbeddingParams::new(
            2.0,
            alpha,
            rho,
            rho,
            SequenceDescriptor::power(rho),
            Majorant::power(alpha + rho),
        )
        .with_phi(Majorant::power(alpha));
        pr.n_max = 1024;
        let rep = condition_ratio(&pr, 2).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        // Tail ≈ ρθ Σ ν^{−αθ−1} ≈ (ρ/α)n^{−αθ}, so the ratio tends to (1 + ρ/α)^{1/θ}.
        let last = rep.lhs_curve.value.last().unwrap() / rep.rhs_curve.value.last().unwrap();
        assert_relative_eq!(last, (1.0 + rho / alpha).sqrt(), max_relative = 0.01);
    }

    #[test]
    fn self_majorization_at_p2() {
        let mut pr = EmbeddingParams::new(
            2.0,
            1.0,
            1.0,
            1.0,
            SequenceDescriptor::power(1.0),
            Majorant::power_log(2.0, 0.5),
        )
        .with_phi(Majorant::power(1.0));
        pr.n_max = 512;
        let first = condition_ratio(&pr, 2).unwrap();
        let delta: Vec<f64> = first
            .lhs_curve
            .n
            .iter()
            .map(|&n| 1.0 / (n + 1) as f64)
            .collect();
        let phi = Majorant::table(delta, first.lhs_curve.value.clone()).unwrap();
        let rep = condition_ratio(&pr.clone().with_phi(phi), 2).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert_relative_eq!(rep.ratio_sup, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn majorant_preconditions_are_reported() {
        let mut pr = params(1.0, SequenceDescriptor::power(0.5), Majorant::power(1.0))
            .with_phi(Majorant::power(0.5));
        pr.rho = 0.5;
        pr.beta = 1.0;
        let rep = condition_ratio(&pr, 7).unwrap();
        assert_eq!(rep.preconditions.len(), 5);
        assert!(rep.preconditions_hold(), "{:?}", rep.preconditions);
        let rep = condition_ratio(&pr, 6).unwrap();
        assert!(rep
            .preconditions
            .iter()
            .any(|c| c.name.contains("lambda_n / n^r")));
        let pr2 = params(2.0, SequenceDescriptor::power(1.0), Majorant::power(1.0));
        let rep = condition_series(&pr2, 5).unwrap();
        assert!(!rep.preconditions_hold());
    }

    #[test]
    fn closed_form_only_for_power_log() {
        let pr = params(
            2.0,
            SequenceDescriptor::table(vec![1.0; 64]),
            Majorant::power(1.0),
        );
        assert_eq!(closed_form_verdict(&pr, 1), None);
        let pr = params(2.0, SequenceDescriptor::constant(1.0), Majorant::power(0.1));
        assert_eq!(closed_form_verdict(&pr, 1), Some(Verdict::Holds));
        assert_eq!(closed_form_verdict(&pr, 2), None);
    }

    #[test]
    fn weyl1_upper_closed_form() {
        let curve = ModulusCurve::from_majorant(&Majorant::power(2.0), 1e-8, 200).unwrap();
        let fp = FunctionalParams::new(2.0, 1.0, 1.0, 0.5);
        let v = integral_functional(Functional::Weyl1Upper, &curve, &fp).unwrap();
        assert_relative_eq!(v, (0.125f64).sqrt(), max_relative = 1e-9);
        let zero = ModulusCurve::new(vec![0.5, 1.0], vec![0.0, 0.0]).unwrap();
        for which in [
            Functional::Weyl1Lower,
            Functional::Weyl5,
            Functional::HhjRhs,
            Functional::B3Upper,
        ] {
            assert_eq!(integral_functional(which, &zero, &fp).unwrap(), 0.0);
        }
    }

    #[test]
    fn divergence_near_zero_is_reported() {
        let curve = ModulusCurve::from_majorant(&Majorant::power(0.5), 1e-6, 60).unwrap();
        let fp = FunctionalParams::new(2.0, 1.0, 1.0, 0.5);
        assert!(matches!(
            integral_functional(Functional::Weyl1Upper, &curve, &fp),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn hhj_matches_direct_quadrature_under_doubling() {
        let (r, beta, big_a, delta) = (0.5, 1.0, -0.5, 0.1);
        let w = Majorant::power(r + beta);
        let mut fp = FunctionalParams::new(2.0, beta, r, delta);
        fp.log_power = big_a;
        let direct_near = integrate(
            |t: f64| {
                if t > 0.0 {
                    t.powf(-2.0 * r - 1.0) * (2.0 / t).ln().powf(-1.0) * t.powf(2.0 * (r + beta))
                } else {
                    0.0
                }
            },
            0.0,
            delta,
            1e-12,
            1e-16,
        );
        let direct_far = integrate(
            |t: f64| {
                t.powf(-2.0 * (r + beta) - 1.0)
                    * (2.0 / t).ln().powf(-2.0)
                    * t.powf(2.0 * (r + beta))
            },
            delta,
            1.0,
            1e-12,
            0.0,
        );
        let direct = direct_near + delta.powf(2.0 * beta) * direct_far;
        let coarse = ModulusCurve::from_majorant(&w, 1e-10, 100).unwrap();
        let fine = ModulusCurve::from_majorant(&w, 1e-20, 200).unwrap();
        let a = integral_functional(Functional::HhjRhs, &coarse, &fp).unwrap();
        let b = integral_functional(Functional::HhjRhs, &fine, &fp).unwrap();
        assert!(((a - direct) / direct).abs() < 1e-6, "{a} vs {direct}");
        assert!(((b - direct) / direct).abs() < 1e-6, "{b} vs {direct}");
    }

    #[test]
    fn weyl4_weyl5_and_i2_agree_for_power_xi() {
        // ξ(u) = u^{−γs−1} makes Λ_n ≍ n^γ and I₂ a weighted form of `Weyl5`.
        let (alpha, r, gamma, s) = (1.0, 1.0, 0.5, 2.0);
        let curve = ModulusCurve::from_majorant(&Majorant::power(r + alpha), 1e-12, 300).unwrap();
        let mut fp = FunctionalParams::new(2.0, alpha, r, 0.05);
        fp.eps = r - gamma;
        fp.xi = Some(XiFunction::Power {
            c: -gamma * s - 1.0,
        });
        let w5 = integral_functional(Functional::Weyl5, &curve, &fp).unwrap();
        let i2 = integral_functional(Functional::I2, &curve, &fp).unwrap();
        let ratio = i2 / w5;
        assert!(ratio > 0.2 && ratio < 5.0, "{ratio}");
        let w4 = integral_functional(Functional::Weyl4, &curve, &fp).unwrap();
        assert_relative_eq!(w4, w5, max_relative = 1e-12);
    }

    #[test]
    fn b3_example_slopes() {
        for &big_a in &[0.6, 0.75, 0.9] {
            for &p in &[2.0, 4.0] {
                let r = 1.0;
                let curve = ModulusCurve::from_majorant(&Majorant::power_log(r, big_a), 1e-60, 600)
                    .unwrap();
                let deltas: Vec<f64> = (2..=10).map(|k| 10f64.powi(-2 * k)).collect();
                let mut up = Vec::new();
                let mut lo = Vec::new();
                for &d in &deltas {
                    let fp = FunctionalParams::new(p, 1.0, r, d);
                    up.push(integral_functional(Functional::B3Upper, &curve, &fp).unwrap());
                    lo.push(integral_functional(Functional::B3Lower, &curve, &fp).unwrap());
                }
                let su = log_log_inverse_slope(&deltas, &up).unwrap();
                let sl = log_log_inverse_slope(&deltas, &lo).unwrap();
                assert!(
                    (su - (0.5 - big_a)).abs() < 0.1,
                    "A={big_a} p={p} upper {su}"
                );
                assert!(
                    (sl - (1.0 / p - big_a)).abs() < 0.1,
                    "A={big_a} p={p} lower {sl}"
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn enlarging_omega_never_turns_holds_into_fails(a in 0.6..2.5f64, b in 0.0..1.5f64, scale in 1.0..10.0f64, id in prop::sample::select(vec![1u8, 5])) {
            let p = if id == 1 { 2.0 } else { 1.0 };
            let base = params(p, SequenceDescriptor::power(1.0), Majorant::power_log(a, b)).with_n_max(1024);
            let small = condition_series(&base, id).unwrap();
            let bigger_w = Majorant::table(
                crate::sequences::log_grid(1e-4, 1.0, 400),
                crate::sequences::log_grid(1e-4, 1.0, 400).iter().map(|&d| scale * Majorant::power_log(a - 0.05, b).eval(d)).collect(),
            ).unwrap();
            let mut big = base.clone();
            big.omega = bigger_w;
            let large = condition_series(&big, id).unwrap();
            prop_assert!(!(large.verdict == Verdict::Holds && small.verdict == Verdict::Fails));
            prop_assert!(large.partial_sums.value.last().unwrap() >= small.partial_sums.value.last().unwrap());
        }
    }
}
