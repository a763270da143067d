//! Finite-order witnesses f₁–f₁₂ used in the necessity arguments, and the
//! polynomials τ_{n+1}, as truncated trigonometric polynomials with a bound
//! on what the truncation dropped.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::fit::log_log_slope;
use crate::sequences::{
    q_lower_sequence, q_upper_sequence, BlockSequence, Majorant, SequenceDescriptor,
};
use crate::transforms::conjugate;
use crate::trigpoly::TrigPoly;

/// τ_{n+1}(x) = Σ_{j=1}^{n+1} α_j^n sin jx with α_j^n = j/(n+2) for
/// j ≤ (n+2)/2 and 1 − j/(n+2) otherwise.
pub fn tau_poly(n: usize) -> TrigPoly {
    let b: Vec<f64> = (1..=n + 1).map(|j| tau_coefficient(n, j)).collect();
    TrigPoly::from_coeffs(&vec![0.0; n + 1], &b)
}

fn tau_coefficient(n: usize, j: usize) -> f64 {
    let m = (n + 2) as f64;
    if 2 * j <= n + 2 {
        j as f64 / m
    } else {
        1.0 - j as f64 / m
    }
}

fn eps_at(eps: &[f64], j: usize) -> f64 {
    if j == 0 {
        return f64::NAN;
    }
    eps.get(j - 1).copied().unwrap_or(0.0)
}

/// a_ν = ε_ν − ν Σ_{j≥ν} (ε_j − ε_{j+1})/(j+1), with `eps[j−1]` = ε_j and
/// ε_j = 0 past the table.
pub fn coefficient_f6(eps: &[f64], nu: usize) -> f64 {
    if nu == 0 || nu > eps.len() {
        return 0.0;
    }
    let mut s = 0.0;
    for j in nu..=eps.len() {
        s += (eps_at(eps, j) - eps_at(eps, j + 1)) / (j + 1) as f64;
    }
    eps_at(eps, nu) - nu as f64 * s
}

/// Sine coefficient b_ν of Σ_j (ε_j − ε_{j+1}) τ_j:
/// Σ_{j=ν}^{2ν−2} (1 − ν/(j+1))(ε_j − ε_{j+1}) + Σ_{j≥2ν−1} ν/(j+1)(ε_j − ε_{j+1}).
pub fn coefficient_f8(eps: &[f64], nu: usize) -> f64 {
    if nu == 0 || nu > eps.len() {
        return 0.0;
    }
    let v = nu as f64;
    let mut s = 0.0;
    for j in nu..=eps.len() {
        let d = eps_at(eps, j) - eps_at(eps, j + 1);
        let w = if j + 1 < 2 * nu {
            1.0 - v / (j + 1) as f64
        } else {
            v / (j + 1) as f64
        };
        s += w * d;
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    F1,
    F2,
    F3,
    /// The block variant of f₃ for 1 < p < 2.
    F3p,
    F4,
    F5,
    F6,
    F7,
    F8,
    F9,
    F10,
    F11,
    F12,
}

impl Witness {
    pub const ALL: [Witness; 13] = [
        Witness::F1,
        Witness::F2,
        Witness::F3,
        Witness::F3p,
        Witness::F4,
        Witness::F5,
        Witness::F6,
        Witness::F7,
        Witness::F8,
        Witness::F9,
        Witness::F10,
        Witness::F11,
        Witness::F12,
    ];

    /// Lacunary and block series are truncated by their top dyadic index.
    pub fn is_dyadic(self) -> bool {
        matches!(
            self,
            Witness::F1
                | Witness::F2
                | Witness::F3
                | Witness::F3p
                | Witness::F9
                | Witness::F10
                | Witness::F11
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Witness::F1 => "f1",
            Witness::F2 => "f2",
            Witness::F3 => "f3",
            Witness::F3p => "f3p",
            Witness::F4 => "f4",
            Witness::F5 => "f5",
            Witness::F6 => "f6",
            Witness::F7 => "f7",
            Witness::F8 => "f8",
            Witness::F9 => "f9",
            Witness::F10 => "f10",
            Witness::F11 => "f11",
            Witness::F12 => "f12",
        }
    }
}

impl std::str::FromStr for Witness {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        Witness::ALL
            .iter()
            .copied()
            .find(|w| w.name() == s.to_ascii_lowercase())
            .ok_or_else(|| invalid(format!("unknown gallery function {s}")))
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

/// Inputs of [`build_gallery`]. `rho` is the order shift of the class
/// H_{α+ρ}; the (6)-type witnesses f₁₀–f₁₂ take r here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryParams {
    #[serde(default)]
    pub omega: Option<Majorant>,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "two", with = "crate::exponent")]
    pub p: f64,
    #[serde(default)]
    pub lambda: Option<SequenceDescriptor>,
    #[serde(default)]
    pub phi: Option<Majorant>,
    /// Explicit ε_1, ε_2, … (zero past the list; ε_0 is taken as ε_1).
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
    /// Sparse support m_0 < m_1 < … for f₄/f₅; defaults to m_k = 2^k.
    #[serde(default)]
    pub support: Option<Vec<usize>>,
    /// γ on the support; defaults to γ_k = 2^{−k}.
    #[serde(default)]
    pub gamma: Option<Vec<f64>>,
}

impl Default for GalleryParams {
    fn default() -> Self {
        Self {
            omega: None,
            alpha: 1.0,
            rho: 0.0,
            p: 2.0,
            lambda: None,
            phi: None,
            eps: None,
            support: None,
            gamma: None,
        }
    }
}

impl GalleryParams {
    pub fn with_omega(omega: Majorant, alpha: f64, rho: f64, p: f64) -> Self {
        Self {
            omega: Some(omega),
            alpha,
            rho,
            p,
            ..Self::default()
        }
    }

    pub fn with_eps(eps: Vec<f64>) -> Self {
        Self {
            eps: Some(eps),
            ..Self::default()
        }
    }

    fn omega(&self) -> Result<&Majorant> {
        self.omega
            .as_ref()
            .ok_or_else(|| invalid("this function needs the majorant ω"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryMeta {
    pub which: Witness,
    pub trunc: usize,
    pub top_frequency: usize,
    #[serde(with = "crate::exponent")]
    pub p: f64,
    pub theta: f64,
    /// Bound on Σ|dropped a_ν| + |dropped b_ν|; infinite when that sum
    /// diverges.
    pub tail_bound: f64,
    /// Bound on the L₁ norm of the dropped part, when one is available.
    pub tail_l1_bound: Option<f64>,
    /// Constants of the Q- or q-sequence used, when one was built.
    pub sequence_lower: Option<f64>,
    pub sequence_upper: Option<f64>,
    pub sequence_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryFunction {
    pub poly: TrigPoly,
    pub meta: GalleryMeta,
}

const EXTRA_OCTAVES: usize = 6;
const DENSE_HORIZON: usize = 16;

/// Remainder of a lacunary coefficient sum: the computed extra terms plus a
/// geometric continuation fitted to the last two.
fn geometric_tail(extra: &[f64]) -> f64 {
    let sum: f64 = extra.iter().sum();
    match extra {
        [.., a, b] if *b == 0.0 && *a == 0.0 => sum,
        [.., a, b] if *a > 0.0 && *b < *a => {
            let q = b / a;
            sum + b * q / (1.0 - q)
        }
        [] => 0.0,
        _ => f64::INFINITY,
    }
}

/// Remainder of a dense coefficient sum with terms at n = start, start+1, …:
/// the computed terms plus the power continuation fitted to the last half.
fn power_tail_sum(start: usize, terms: &[f64]) -> f64 {
    let sum: f64 = terms.iter().sum();
    let len = terms.len();
    if len < 4 || terms[len / 2..].iter().all(|&t| t == 0.0) {
        return sum;
    }
    let (ns, ts): (Vec<f64>, Vec<f64>) = (len / 2..len)
        .map(|i| ((start + i) as f64, terms[i]))
        .unzip();
    match log_log_slope(&ns, &ts) {
        Some(s) if -s > 1.0 => {
            let n_end = (start + len - 1) as f64;
            sum + terms[len - 1] * n_end / (-s - 1.0)
        }
        _ => f64::INFINITY,
    }
}

struct Eps {
    /// ε_0, ε_1, …, ε_{len−1}.
    values: Vec<f64>,
    seq: Option<BlockSequence>,
}

impl Eps {
    fn at(&self, j: usize) -> f64 {
        self.values.get(j).copied().unwrap_or(0.0)
    }
}

/// ε from the explicit table or as a q_{α+ρ,θ}(ω)-sequence up to `n`.
fn eps_sequence(params: &GalleryParams, theta: f64, n: usize) -> Result<Eps> {
    if let Some(t) = &params.eps {
        if t.is_empty() || t.iter().any(|v| !(*v >= 0.0)) || t.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid(
                "ε must be a non-empty, non-negative, non-increasing table",
            ));
        }
        let mut values = Vec::with_capacity(t.len() + 1);
        values.push(t[0]);
        values.extend_from_slice(t);
        return Ok(Eps { values, seq: None });
    }
    let seq = q_lower_sequence(params.omega()?, params.alpha + params.rho, theta, n)?;
    Ok(Eps {
        values: seq.values.clone(),
        seq: Some(seq),
    })
}

fn meta(
    which: Witness,
    trunc: usize,
    top: usize,
    params: &GalleryParams,
    theta: f64,
    tail: f64,
    seq: Option<&BlockSequence>,
) -> GalleryMeta {
    GalleryMeta {
        which,
        trunc,
        top_frequency: top,
        p: params.p,
        theta,
        tail_bound: tail,
        tail_l1_bound: None,
        sequence_lower: seq.map(|s| s.lower),
        sequence_upper: seq.map(|s| s.upper),
        sequence_fallback: seq.map(|s| s.fallback).unwrap_or(false),
    }
}

/// Builds the named witness truncated at `trunc` (top dyadic index for the
/// lacunary and block series, top harmonic otherwise).
pub fn build_gallery(
    which: Witness,
    params: &GalleryParams,
    trunc: usize,
) -> Result<GalleryFunction> {
    let top = if which.is_dyadic() {
        if trunc >= 40 {
            return Err(invalid("dyadic depth must stay below 40"));
        }
        1usize << trunc
    } else {
        trunc
    };
    if top < 8 {
        return Err(invalid("truncation must keep at least 8 harmonics"));
    }
    crate::error::check_exponent(params.p)?;
    let theta_p = params.p.min(2.0);
    let a = params.alpha + params.rho;
    match which {
        Witness::F1 | Witness::F9 => {
            let theta = if which == Witness::F1 { theta_p } else { 1.0 };
            let k_ext = trunc + EXTRA_OCTAVES;
            let seq = q_upper_sequence(params.omega()?, a, theta, 1 << k_ext)?;
            let psi = &seq.values;
            let coef = |nu: usize| {
                let (hi, lo) = (psi[1 << nu], psi[1 << (nu - 1)]);
                let scale = 2f64.powf(-(nu as f64) * a);
                if which == Witness::F1 {
                    scale * (hi * hi - lo * lo).max(0.0).sqrt()
                } else {
                    scale * (hi - lo).max(0.0)
                }
            };
            let mut poly = TrigPoly::zero();
            if which == Witness::F9 {
                poly.add_term(1, psi[1], 0.0);
            }
            for nu in 1..=trunc {
                poly.add_term(1 << nu, coef(nu), 0.0);
            }
            let extra: Vec<f64> = (trunc + 1..=k_ext).map(coef).collect();
            let tail = geometric_tail(&extra);
            Ok(GalleryFunction {
                poly,
                meta: meta(which, trunc, top, params, theta, tail, Some(&seq)),
            })
        }
        Witness::F2 => {
            let p = params.p;
            let k_ext = trunc + EXTRA_OCTAVES;
            let seq = q_upper_sequence(params.omega()?, a, theta_p, 1 << k_ext)?;
            let psi = &seq.values;
            let level = |nu: usize| {
                let nf = nu as f64;
                2f64.powf(-nf * a)
                    * 2f64.powf(nf * (1.0 / p - 1.0))
                    * (psi[1 << nu].powf(p) - psi[1 << (nu - 1)].powf(p))
                        .max(0.0)
                        .powf(1.0 / p)
            };
            let mut poly = TrigPoly::cos(1, psi[1]);
            for nu in 1..=trunc {
                let c = level(nu);
                for mu in (1 << (nu - 1)) + 1..=(1 << nu) {
                    poly.add_term(mu, c, 0.0);
                }
            }
            let extra: Vec<f64> = (trunc + 1..=k_ext)
                .map(|nu| level(nu) * (1usize << (nu - 1)) as f64)
                .collect();
            Ok(GalleryFunction {
                poly,
                meta: meta(
                    which,
                    trunc,
                    top,
                    params,
                    theta_p,
                    geometric_tail(&extra),
                    Some(&seq),
                ),
            })
        }
        Witness::F3 | Witness::F10 | Witness::F11 => {
            let theta = if which == Witness::F3 { theta_p } else { 1.0 };
            let k_ext = trunc + EXTRA_OCTAVES;
            let eps = eps_sequence(params, theta, 1 << (k_ext + 1))?;
            let diff = |i: usize, j: usize| -> f64 {
                let (x, y) = (eps.at(i), eps.at(j));
                if which == Witness::F3 {
                    (x * x - y * y).max(0.0).sqrt()
                } else {
                    (x - y).max(0.0)
                }
            };
            let constant = if which == Witness::F3 {
                eps.at(0)
            } else {
                0.5 * eps.at(0)
            };
            let mut poly = TrigPoly::constant(constant);
            poly.add_term(1, diff(1, 2), 0.0);
            for nu in 1..=trunc {
                poly.add_term(1 << nu, diff(1 << nu, 1 << (nu + 1)), 0.0);
            }
            let extra: Vec<f64> = (trunc + 1..=k_ext)
                .map(|nu| diff(1 << nu, 1 << (nu + 1)))
                .collect();
            let tail = geometric_tail(&extra);
            if which == Witness::F11 {
                poly = conjugate(&poly);
            }
            Ok(GalleryFunction {
                poly,
                meta: meta(which, trunc, top, params, theta, tail, eps.seq.as_ref()),
            })
        }
        Witness::F3p => {
            let p = params.p;
            let k_ext = trunc + EXTRA_OCTAVES;
            let eps = eps_sequence(params, theta_p, 1 << (k_ext + 2))?;
            let pd = |i: usize, j: usize| {
                (eps.at(i).powf(p) - eps.at(j).powf(p))
                    .max(0.0)
                    .powf(1.0 / p)
            };
            let level = |nu: usize| {
                2f64.powf(nu as f64 * (1.0 / p - 1.0)) * pd(1 << (nu + 1), 1 << (nu + 2))
            };
            let mut poly = TrigPoly::constant(eps.at(0));
            poly.add_term(1, pd(1, 2), 0.0);
            for nu in 0..trunc {
                let c = level(nu);
                for mu in (1 << nu) + 1..=(1 << (nu + 1)) {
                    poly.add_term(mu, c, 0.0);
                }
            }
            let extra: Vec<f64> = (trunc..k_ext)
                .map(|nu| level(nu) * (1usize << nu) as f64)
                .collect();
            Ok(GalleryFunction {
                poly,
                meta: meta(
                    which,
                    trunc,
                    top,
                    params,
                    theta_p,
                    geometric_tail(&extra),
                    eps.seq.as_ref(),
                ),
            })
        }
        Witness::F4 | Witness::F5 => {
            let support: Vec<usize> = params
                .support
                .clone()
                .unwrap_or_else(|| (0..40).map(|k| 1usize << k).collect());
            if support.windows(2).any(|w| w[1] < 2 * w[0])
                || support.first().map_or(true, |&m| m == 0)
            {
                return Err(invalid(
                    "support must start at m ≥ 1 and at least double at each step",
                ));
            }
            let gamma: Vec<f64> = params
                .gamma
                .clone()
                .unwrap_or_else(|| (0..support.len()).map(|k| 0.5f64.powi(k as i32)).collect());
            if gamma.len() < support.len() {
                return Err(invalid("γ must cover the support"));
            }
            let coef = |k: usize| -> Result<f64> {
                let m = support[k];
                Ok(if which == Witness::F4 {
                    let lambda = params
                        .lambda
                        .as_ref()
                        .ok_or_else(|| invalid("f4 needs λ"))?;
                    gamma[k] / lambda.eval(m)?
                } else {
                    let phi = params.phi.as_ref().ok_or_else(|| invalid("f5 needs φ"))?;
                    gamma[k] * phi.eval(1.0 / m as f64)
                })
            };
            let mut poly = TrigPoly::zero();
            let mut tail = 0.0;
            for k in 0..support.len() {
                let c = coef(k)?;
                if support[k] + 1 <= trunc {
                    poly.add_term(support[k] + 1, c, 0.0);
                } else {
                    tail += c.abs();
                }
            }
            if params.support.is_none() && params.gamma.is_none() {
                // Default support is cut at 2^39; γ past it sums to at most 2^{−39}
                // times the largest coefficient factor.
                tail += 0.5f64.powi(39) * coef(0)?.abs();
            }
            Ok(GalleryFunction {
                poly,
                meta: meta(which, trunc, top, params, theta_p, tail, None),
            })
        }
        Witness::F6 | Witness::F8 | Witness::F12 => {
            let n = trunc;
            let horizon = if params.eps.is_some() {
                n + 1
            } else {
                DENSE_HORIZON * n
            };
            let eps = eps_sequence(params, 1.0, horizon + 1)?;
            // ε'_j = ε_j − ε_{N+1} on 1..N keeps the first N Fejér or τ terms exactly.
            let cut = eps.at(n + 1);
            let trimmed: Vec<f64> = (1..=n).map(|j| eps.at(j) - cut).collect();
            let last = if params.eps.is_some() {
                params.eps.as_ref().map(|t| t.len()).unwrap_or(0)
            } else {
                horizon
            };
            let mut poly;
            let mut dropped = Vec::new();
            if which == Witness::F6 {
                let a: Vec<f64> = (1..=n).map(|nu| coefficient_f6(&trimmed, nu)).collect();
                poly = TrigPoly::from_coeffs(&a, &vec![0.0; n]);
                poly.add_term(0, 0.5 * (eps.at(1) - cut), 0.0);
                for nu in n + 1..=last {
                    dropped.push((eps.at(nu) - eps.at(nu + 1)) * (nu + 2) as f64 / 2.0);
                }
            } else {
                let b: Vec<f64> = (1..=n).map(|nu| coefficient_f8(&trimmed, nu)).collect();
                poly = TrigPoly::from_coeffs(&vec![0.0; n], &b);
                for nu in n + 1..=last {
                    let tau_sum: f64 = (1..=nu).map(|j| tau_coefficient(nu - 1, j)).sum();
                    dropped.push((eps.at(nu) - eps.at(nu + 1)) * tau_sum);
                }
                if which == Witness::F12 {
                    poly = conjugate(&poly);
                }
            }
            let tail = if params.eps.is_some() {
                dropped.iter().sum()
            } else {
                power_tail_sum(n + 1, &dropped)
            };
            let mut meta = meta(which, trunc, top, params, 1.0, tail, eps.seq.as_ref());
            if which == Witness::F6 {
                // K_ν ≥ 0 with ∫K_ν = π, so the dropped Σ_{ν>N}(ε_ν − ε_{ν+1})K_ν has
                // L₁ norm π ε_{N+1}.
                meta.tail_l1_bound = Some(PI * cut);
            }
            Ok(GalleryFunction { poly, meta })
        }
        Witness::F7 => {
            let n = trunc;
            let horizon = if params.eps.is_some() {
                n
            } else {
                DENSE_HORIZON * n
            };
            let eps = eps_sequence(params, 1.0, horizon + 1)?;
            let b: Vec<f64> = (1..=n).map(|nu| eps.at(nu) / nu as f64).collect();
            let poly = TrigPoly::from_coeffs(&vec![0.0; n], &b);
            let tail = match &params.eps {
                Some(t) => (n + 1..=t.len()).map(|nu| eps.at(nu) / nu as f64).sum(),
                None => {
                    let dropped: Vec<f64> =
                        (n + 1..=horizon).map(|nu| eps.at(nu) / nu as f64).collect();
                    power_tail_sum(n + 1, &dropped)
                }
            };
            Ok(GalleryFunction {
                poly,
                meta: meta(which, trunc, top, params, 1.0, tail, eps.seq.as_ref()),
            })
        }
    }
}
