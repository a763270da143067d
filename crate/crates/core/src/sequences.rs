//! Positive sequences λ_n, majorants ω(δ), their difference classification,
//! Φ_α membership, the Q- and q-sequence constructions and the Λ(s, r, t)
//! transforming sequence.
//!
//! Differences follow the orientation Δλ_n = λ_n − λ_{n+1} and
//! Δ²λ_n = λ_n − 2λ_{n+1} + λ_{n+2}; an increasing sequence therefore has
//! Δλ_n ≤ 0 and a convex one has Δ²λ_n ≥ 0.
//!
//! Sequences are returned one-based: index n holds the n-th term and slot 0
//! is documented per function.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::ls_slope;
use crate::quad::{integrate, integrate_to_infinity};

/// Weight function ξ on (0, 1] used by the Λ(s, r, t) family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum XiFunction {
    /// ξ(u) = u^c.
    Power { c: f64 },
    /// ξ(u) = u^c (ln(e/u))^d.
    PowerLog { c: f64, d: f64 },
}

impl XiFunction {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            XiFunction::Power { c } => u.powf(c),
            XiFunction::PowerLog { c, d } => u.powf(c) * (1.0 - u.ln()).powf(d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SequenceFamily {
    /// λ_n = n^r (ln(n+1))^A.
    PowerLog {
        r: f64,
        #[serde(rename = "A", default)]
        a: f64,
    },
    /// λ_n = c.
    Constant { c: f64 },
    /// λ_n = values[n−1].
    Table { values: Vec<f64> },
    /// λ_n = Λ(s, r, 1/n).
    LambdaIntegral { xi: XiFunction, r: f64, s: f64 },
}

fn default_hint() -> usize {
    1 << 20
}

/// A positive sequence λ_n, n ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDescriptor {
    #[serde(flatten)]
    pub family: SequenceFamily,
    #[serde(default = "default_hint")]
    pub n_max_hint: usize,
}

impl SequenceDescriptor {
    pub fn new(family: SequenceFamily) -> Self {
        let n_max_hint = match &family {
            SequenceFamily::Table { values } => values.len(),
            _ => default_hint(),
        };
        Self { family, n_max_hint }
    }

    pub fn power_log(r: f64, a: f64) -> Self {
        Self::new(SequenceFamily::PowerLog { r, a })
    }

    /// λ_n = n^r.
    pub fn power(r: f64) -> Self {
        Self::power_log(r, 0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(SequenceFamily::Constant { c })
    }

    pub fn table(values: Vec<f64>) -> Self {
        Self::new(SequenceFamily::Table { values })
    }

    pub fn lambda_integral(xi: XiFunction, r: f64, s: f64) -> Self {
        Self::new(SequenceFamily::LambdaIntegral { xi, r, s })
    }

    /// λ_n; see [`eval_lambda`].
    pub fn eval(&self, n: usize) -> Result<f64> {
        eval_lambda(self, n)
    }

    /// λ_1..λ_{n_max} one-based; slot 0 is NaN.
    pub fn values(&self, n_max: usize) -> Result<Vec<f64>> {
        let mut v = Vec::with_capacity(n_max + 1);
        v.push(f64::NAN);
        for n in 1..=n_max {
            v.push(self.eval(n)?);
        }
        Ok(v)
    }

    /// (r, A) when the family is a pure power-log law (constants count as
    /// r = A = 0 after scaling).
    pub fn power_log_exponents(&self) -> Option<(f64, f64)> {
        match self.family {
            SequenceFamily::PowerLog { r, a } => Some((r, a)),
            SequenceFamily::Constant { .. } => Some((0.0, 0.0)),
            _ => None,
        }
    }
}

/// λ_n for n ≥ 1.
pub fn eval_lambda(d: &SequenceDescriptor, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("sequence index starts at 1"));
    }
    match &d.family {
        SequenceFamily::PowerLog { r, a } => {
            let nf = n as f64;
            let base = if *r == 0.0 { 1.0 } else { nf.powf(*r) };
            if *a == 0.0 {
                Ok(base)
            } else {
                Ok(base * (nf + 1.0).ln().powf(*a))
            }
        }
        SequenceFamily::Constant { c } => Ok(*c),
        SequenceFamily::Table { values } => {
            if n > values.len() || n > d.n_max_hint {
                Err(Error::TableOutOfRange {
                    index: n,
                    len: values.len().min(d.n_max_hint),
                })
            } else {
                Ok(values[n - 1])
            }
        }
        SequenceFamily::LambdaIntegral { xi, r, s } => lambda_integral(xi, *r, *s, 1.0 / n as f64),
    }
}

/// Λ(s, r, t) = (∫_t^1 ξ + t^{−rs}∫_0^t u^{rs}ξ(u)du)^{1/s}.
///
/// Both integrals are taken in the logarithmic variable: u = e^{−y} on
/// [t, 1] and u = t·e^{−z} on (0, t], so the second term becomes
/// t·∫_0^∞ e^{−(rs+1)z} ξ(t e^{−z}) dz.
pub fn lambda_integral(xi: &XiFunction, r: f64, s: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(invalid(format!("t = {t} is outside (0, 1]")));
    }
    if !(s > 0.0) {
        return Err(invalid("s must be positive"));
    }
    let rs = r * s;
    let upper = if t < 1.0 {
        let l = -t.ln();
        integrate(
            |y: f64| xi.eval((-y).exp()) * (-y).exp(),
            0.0,
            l,
            1e-12,
            0.0,
        )
    } else {
        0.0
    };
    let near_zero = integrate_to_infinity(
        |z: f64| (-(rs + 1.0) * z).exp() * xi.eval(t * (-z).exp()),
        0.0,
        1e-12,
    )
    .map_err(|e| match e {
        Error::Divergent(msg) => Error::Divergent(format!("u^(rs) xi(u) near 0: {msg}")),
        other => other,
    })?;
    Ok((upper + t * near_zero).powf(1.0 / s))
}

/// A majorant ω(δ) on (0, π].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MajorantFamily {
    /// ω(δ) = δ^a (ln(e/δ))^{−b}; the logarithmic factor is held at its
    /// δ = 1 value for δ > 1, where ln(e/δ) would otherwise approach zero.
    PowerLog {
        a: f64,
        #[serde(default)]
        b: f64,
    },
    /// Log-log interpolation through (δ_i, ω_i), δ ascending.
    Table { delta: Vec<f64>, omega: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Majorant {
    #[serde(flatten)]
    pub family: MajorantFamily,
    /// The α of a claimed Φ_α membership.
    #[serde(default)]
    pub alpha_class: Option<f64>,
}

impl Majorant {
    pub fn power_log(a: f64, b: f64) -> Self {
        Self {
            family: MajorantFamily::PowerLog { a, b },
            alpha_class: None,
        }
    }

    /// ω(δ) = δ^a.
    pub fn power(a: f64) -> Self {
        Self::power_log(a, 0.0)
    }

    /// Tabulated majorant; the pairs are sorted by δ.
    pub fn table(delta: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if delta.len() != omega.len() || delta.is_empty() {
            return Err(invalid(
                "majorant table needs equally long, non-empty δ and ω lists",
            ));
        }
        let mut pairs: Vec<(f64, f64)> = delta.into_iter().zip(omega).collect();
        if pairs.iter().any(|(d, w)| !(*d > 0.0) || !(*w >= 0.0)) {
            return Err(invalid("majorant table needs δ > 0 and ω ≥ 0"));
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (delta, omega) = pairs.into_iter().unzip();
        Ok(Self {
            family: MajorantFamily::Table { delta, omega },
            alpha_class: None,
        })
    }

    pub fn with_alpha_class(mut self, alpha: f64) -> Self {
        self.alpha_class = Some(alpha);
        self
    }

    pub fn eval(&self, delta: f64) -> f64 {
        match &self.family {
            MajorantFamily::PowerLog { a, b } => {
                let log_factor = 1.0 + (-delta.ln()).max(0.0);
                let base = if *a == 0.0 { 1.0 } else { delta.powf(*a) };
                if *b == 0.0 {
                    base
                } else {
                    base * log_factor.powf(-*b)
                }
            }
            MajorantFamily::Table {
                delta: ds,
                omega: ws,
            } => table_interp(ds, ws, delta),
        }
    }

    /// (a, b) for the power-log family.
    pub fn power_log_exponents(&self) -> Option<(f64, f64)> {
        match self.family {
            MajorantFamily::PowerLog { a, b } => Some((a, b)),
            MajorantFamily::Table { .. } => None,
        }
    }
}

fn table_interp(ds: &[f64], ws: &[f64], x: f64) -> f64 {
    let n = ds.len();
    if n == 1 {
        return ws[0];
    }
    let seg = |i: usize| -> f64 {
        let (x0, x1, y0, y1) = (ds[i], ds[i + 1], ws[i], ws[i + 1]);
        if y0 > 0.0 && y1 > 0.0 {
            let t = (x / x0).ln() / (x1 / x0).ln();
            (y0.ln() + t * (y1 / y0).ln()).exp()
        } else {
            let t = (x - x0) / (x1 - x0);
            (y0 + t * (y1 - y0)).max(0.0)
        }
    };
    if x <= ds[0] {
        if x == ds[0] {
            return ws[0];
        }
        return seg(0);
    }
    if x >= ds[n - 1] {
        return ws[n - 1];
    }
    let i = ds.partition_point(|&d| d <= x) - 1;
    if x == ds[i] {
        return ws[i];
    }
    seg(i)
}

/// Which of the three Φ_α properties failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiViolation {
    /// ω does not tend to zero: log-log trend of ω against 1/δ is ≥ −0.01.
    NoLimitZero {
        trend_slope: f64,
    },
    /// ω decreases between grid points i and i+1.
    NotNonDecreasing {
        index: usize,
    },
    /// δ^{−α}ω(δ) increases between grid points i and i+1.
    ScaledNotNonIncreasing {
        index: usize,
    },
    Negative {
        index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiCheck {
    pub member: bool,
    pub violations: Vec<PhiViolation>,
}

/// Verifies Φ_α membership of `w` on a sorted δ-grid inside (0, π].
pub fn phi_alpha_check(w: &Majorant, alpha: f64, grid: &[f64]) -> Result<PhiCheck> {
    if grid.len() < 2
        || grid
            .iter()
            .any(|d| !(*d > 0.0 && *d <= std::f64::consts::PI))
    {
        return Err(invalid("grid must hold at least two points in (0, π]"));
    }
    if grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(invalid("grid must be strictly increasing"));
    }
    const REL: f64 = 1e-12;
    const TOL_ABS: f64 = 1e-12;
    let vals: Vec<f64> = grid.iter().map(|&d| w.eval(d)).collect();
    let mut violations = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        if !(*v >= 0.0) {
            violations.push(PhiViolation::Negative { index: i });
        }
    }
    for i in 0..grid.len() - 1 {
        if vals[i + 1] < vals[i] * (1.0 - REL) {
            violations.push(PhiViolation::NotNonDecreasing { index: i });
        }
        let s0 = vals[i] * grid[i].powf(-alpha);
        let s1 = vals[i + 1] * grid[i + 1].powf(-alpha);
        if s1 > s0 * (1.0 + REL) {
            violations.push(PhiViolation::ScaledNotNonIncreasing { index: i });
        }
    }
    if vals[0] > TOL_ABS {
        let k = (grid.len() / 4).max(2);
        let xs: Vec<f64> = grid[..k].iter().map(|d| (1.0 / d).ln()).collect();
        let ys: Vec<f64> = vals[..k].iter().map(|v| v.max(1e-300).ln()).collect();
        let slope = ls_slope(&xs, &ys).unwrap_or(0.0);
        if !(slope < -0.01) {
            violations.push(PhiViolation::NoLimitZero { trend_slope: slope });
        }
    }
    Ok(PhiCheck {
        member: violations.is_empty(),
        violations,
    })
}

/// Log-spaced δ-grid on [δ_min, δ_max].
pub fn log_grid(delta_min: f64, delta_max: f64, points: usize) -> Vec<f64> {
    let (l0, l1) = (delta_min.ln(), delta_max.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                delta_max
            } else {
                (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotone {
    Increasing,
    Decreasing,
    Constant,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convexity {
    /// Δ² ≥ 0 and Δ² ≤ 0 both hold (an arithmetic progression).
    Linear,
    Convex,
    Concave,
    Mixed,
}

/// Whether every term of a difference sequence is ≥ 0 and/or ≤ 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPattern {
    pub all_nonneg: bool,
    pub all_nonpos: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceClass {
    pub monotone: Monotone,
    pub convexity: Convexity,
    pub delta: SignPattern,
    pub delta2: SignPattern,
}

impl SequenceClass {
    pub fn is_increasing(&self) -> bool {
        matches!(self.monotone, Monotone::Increasing | Monotone::Constant)
    }

    pub fn is_decreasing(&self) -> bool {
        matches!(self.monotone, Monotone::Decreasing | Monotone::Constant)
    }

    /// Δ² ≥ 0.
    pub fn is_convex(&self) -> bool {
        self.delta2.all_nonneg
    }

    /// Δ² ≤ 0.
    pub fn is_concave(&self) -> bool {
        self.delta2.all_nonpos
    }
}

/// Derived sequences whose difference signs enter embedding preconditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Derived {
    /// λ_n itself.
    Lambda,
    /// 1/λ_n.
    Reciprocal,
    /// n^{−ρ} λ_n.
    ScaledDown { rho: f64 },
    /// λ_n / n^r.
    OverPower { r: f64 },
    /// n^r / λ_n.
    PowerOver { r: f64 },
}

impl Derived {
    fn apply(&self, n: usize, lambda: f64) -> f64 {
        let nf = n as f64;
        match *self {
            Derived::Lambda => lambda,
            Derived::Reciprocal => 1.0 / lambda,
            Derived::ScaledDown { rho } => nf.powf(-rho) * lambda,
            Derived::OverPower { r } => lambda / nf.powf(r),
            Derived::PowerOver { r } => nf.powf(r) / lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedCheck {
    pub which: Derived,
    pub class: SequenceClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub monotone: Monotone,
    pub convexity: Convexity,
    pub checks: Vec<DerivedCheck>,
}

impl ClassReport {
    pub fn lambda_class(&self) -> SequenceClass {
        self.find(|d| matches!(d, Derived::Lambda))
            .expect("λ check is always present")
    }

    pub fn find<P: Fn(&Derived) -> bool>(&self, pred: P) -> Option<SequenceClass> {
        self.checks.iter().find(|c| pred(&c.which)).map(|c| c.class)
    }
}

/// Difference classification of terms `v[lo..=hi]` of a one-based slice.
pub fn classify_slice(v: &[f64], lo: usize, hi: usize) -> SequenceClass {
    const REL: f64 = 1e-11;
    let mut d1 = SignPattern {
        all_nonneg: true,
        all_nonpos: true,
    };
    let mut d2 = d1;
    for n in lo..hi {
        let d = v[n] - v[n + 1];
        let scale = v[n].abs().max(v[n + 1].abs());
        if d.abs() > REL * scale {
            if d > 0.0 {
                d1.all_nonpos = false;
            } else {
                d1.all_nonneg = false;
            }
        }
        if n + 2 <= hi {
            let dd = v[n] - 2.0 * v[n + 1] + v[n + 2];
            let scale2 = scale.max(v[n + 2].abs());
            if dd.abs() > REL * scale2 {
                if dd > 0.0 {
                    d2.all_nonpos = false;
                } else {
                    d2.all_nonneg = false;
                }
            }
        }
    }
    let monotone = match (d1.all_nonneg, d1.all_nonpos) {
        (true, true) => Monotone::Constant,
        (false, true) => Monotone::Increasing,
        (true, false) => Monotone::Decreasing,
        (false, false) => Monotone::Mixed,
    };
    let convexity = match (d2.all_nonneg, d2.all_nonpos) {
        (true, true) => Convexity::Linear,
        (true, false) => Convexity::Convex,
        (false, true) => Convexity::Concave,
        (false, false) => Convexity::Mixed,
    };
    SequenceClass {
        monotone,
        convexity,
        delta: d1,
        delta2: d2,
    }
}

/// Δ/Δ² sign patterns of λ and 1/λ over 1..n_max.
pub fn classify(d: &SequenceDescriptor, n_max: usize) -> Result<ClassReport> {
    classify_derived(d, n_max, &[Derived::Lambda, Derived::Reciprocal])
}

/// Δ/Δ² sign patterns of every requested derived sequence over 1..n_max.
pub fn classify_derived(
    d: &SequenceDescriptor,
    n_max: usize,
    which: &[Derived],
) -> Result<ClassReport> {
    if n_max < 3 {
        return Err(invalid("classification needs n_max ≥ 3"));
    }
    let lambda = d.values(n_max)?;
    let mut checks = Vec::with_capacity(which.len() + 1);
    let mut wanted = which.to_vec();
    if !wanted.iter().any(|w| matches!(w, Derived::Lambda)) {
        wanted.insert(0, Derived::Lambda);
    }
    for w in wanted {
        let mut v = vec![f64::NAN; n_max + 1];
        for n in 1..=n_max {
            v[n] = w.apply(n, lambda[n]);
        }
        checks.push(DerivedCheck {
            which: w,
            class: classify_slice(&v, 1, n_max),
        });
    }
    let own = checks[0].class;
    Ok(ClassReport {
        monotone: own.monotone,
        convexity: own.convexity,
        checks,
    })
}

/// Output of [`almost_increasing_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmostIncreasing {
    /// sup_{n ≤ n_max/2} λ_n Σ_{n<ν≤n_max} 1/(νλ_ν).
    pub tail_ratio_sup: f64,
    /// The same supremum with n_max halved.
    pub tail_ratio_sup_half: f64,
    /// The same supremum with n_max quartered.
    pub tail_ratio_sup_quarter: f64,
    /// Largest ε = 2^{−k}, k = 1..6, for which n^{−ε}λ_n is almost increasing
    /// with a constant that does not grow when the range is doubled.
    pub eps_witness: Option<f64>,
    pub witness_constant: Option<f64>,
}

impl AlmostIncreasing {
    /// The tail supremum changes by at most 2% when the range doubles, or
    /// its growth over the last doubling is at most 9/10 of the growth over
    /// the one before (a geometrically converging supremum).
    pub fn tail_bounded(&self) -> bool {
        let (s, h, q) = (
            self.tail_ratio_sup,
            self.tail_ratio_sup_half,
            self.tail_ratio_sup_quarter,
        );
        s.is_finite() && (s <= 1.02 * h || s - h <= 0.9 * (h - q))
    }
}

/// Evidence for Σ_{ν>n} 1/(νλ_ν) ≤ C/λ_n and its almost-increasing
/// equivalent.
pub fn almost_increasing_check(d: &SequenceDescriptor, n_max: usize) -> Result<AlmostIncreasing> {
    if n_max < 8 {
        return Err(invalid("almost-increasing check needs n_max ≥ 8"));
    }
    let lambda = d.values(n_max)?;
    let tail_sup = |horizon: usize| -> f64 {
        let mut suffix = 0.0;
        let mut sup = 0.0_f64;
        for n in (1..horizon).rev() {
            suffix += 1.0 / ((n + 1) as f64 * lambda[n + 1]);
            if n <= horizon / 2 {
                sup = sup.max(lambda[n] * suffix);
            }
        }
        sup
    };
    let almost_constant = |eps: f64, horizon: usize| -> f64 {
        let mut run_max = 0.0_f64;
        let mut c = 1.0_f64;
        for m in 1..=horizon {
            let g = (m as f64).powf(-eps) * lambda[m];
            run_max = run_max.max(g);
            c = c.max(run_max / g);
        }
        c
    };
    let mut eps_witness = None;
    let mut witness_constant = None;
    for k in 1..=6 {
        let eps = 0.5_f64.powi(k);
        let half = almost_constant(eps, n_max / 2);
        let full = almost_constant(eps, n_max);
        if full <= 1.01 * half && full <= 10.0 {
            eps_witness = Some(eps);
            witness_constant = Some(full);
            break;
        }
    }
    Ok(AlmostIncreasing {
        tail_ratio_sup: tail_sup(n_max),
        tail_ratio_sup_half: tail_sup(n_max / 2),
        tail_ratio_sup_quarter: tail_sup(n_max / 4),
        eps_witness,
        witness_constant,
    })
}

/// A blockwise sequence together with the two-sided constants recorded for
/// its defining comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSequence {
    /// One-based terms; see the constructor for slot 0.
    pub values: Vec<f64>,
    /// Block starts n_1 = 1 < n_2 < … that lie in 1..=n_max.
    pub breakpoints: Vec<usize>,
    /// Smallest observed ratio of the defining sum to the majorant.
    pub lower: f64,
    /// Largest observed ratio of the defining sum to the majorant.
    pub upper: f64,
    /// The trailing block had no successor and used ε_n = ω(1/(n+1)).
    pub fallback: bool,
}

const SEQUENCE_HORIZON: usize = 64;
const MAX_RATIO_BOUND: f64 = 1e3;

/// ψ with 0 < ψ_n ≤ n^a ω(1/n), ψ non-decreasing, and
/// (Σ_{ν≥n} ν^{−aθ−1}ψ_ν^θ)^{1/θ} ≍ ω(1/n), where a = α + ρ.
///
/// Blocks follow the halving rule n_{s+1} = min{N > n_s : ω(1/N) <
/// ½ω(1/n_s)} and ψ_n = n_s^a ω(1/n_s) on [n_s, n_{s+1}). Slot 0 of the
/// result is 0. The construction runs 64 times past `n_max` so that the
/// recorded constants see the continuation of the tail.
pub fn q_upper_sequence(w: &Majorant, a: f64, theta: f64, n_max: usize) -> Result<BlockSequence> {
    check_args(a, theta, n_max)?;
    let n_ext = n_max.saturating_mul(SEQUENCE_HORIZON);
    let q = |n: usize| (n as f64).powf(a) * w.eval(1.0 / n as f64);
    let mut starts = vec![1usize];
    let mut s = 1usize;
    let mut n = 2usize;
    while n <= n_ext {
        let target = 0.5 * w.eval(1.0 / s as f64);
        while n <= n_ext && w.eval(1.0 / n as f64) >= target {
            n += 1;
        }
        if n > n_ext {
            break;
        }
        starts.push(n);
        s = n;
        n += 1;
    }
    // Block values, then rounding guards that keep ψ ≤ q and ψ monotone.
    let mut block_vals: Vec<f64> = Vec::with_capacity(starts.len());
    for (i, &b) in starts.iter().enumerate() {
        let end = starts.get(i + 1).copied().unwrap_or(n_ext + 1);
        let mut v = q(b);
        for m in b..end {
            v = v.min(q(m));
        }
        block_vals.push(v);
    }
    for i in (0..block_vals.len().saturating_sub(1)).rev() {
        block_vals[i] = block_vals[i].min(block_vals[i + 1]);
    }
    let mut psi = vec![0.0; n_ext + 1];
    for (i, &b) in starts.iter().enumerate() {
        let end = starts.get(i + 1).copied().unwrap_or(n_ext + 1);
        for slot in psi.iter_mut().take(end).skip(b) {
            *slot = block_vals[i];
        }
    }
    if psi[1..].iter().any(|v| !(*v > 0.0)) {
        return Err(Error::SequenceDiagnostic("majorant vanishes on 1/n".into()));
    }
    // Suffix sums Σ_{ν ≥ n} ν^{−aθ−1}ψ_ν^θ with a constant-ψ tail past n_ext.
    let at = a * theta;
    let mut suffix = psi[n_ext].powf(theta) * (n_ext as f64).powf(-at) / at;
    let mut lower = f64::INFINITY;
    let mut upper = 0.0_f64;
    for nu in (1..=n_ext).rev() {
        suffix += (nu as f64).powf(-at - 1.0) * psi[nu].powf(theta);
        if nu <= n_max {
            let ratio = suffix.powf(1.0 / theta) / w.eval(1.0 / nu as f64);
            lower = lower.min(ratio);
            upper = upper.max(ratio);
        }
    }
    psi.truncate(n_max + 1);
    starts.retain(|&b| b <= n_max);
    Ok(BlockSequence {
        values: psi,
        breakpoints: starts,
        lower,
        upper,
        fallback: false,
    })
}

/// ε with 0 < ε_n ≤ ω(1/(n+1)), ε non-increasing, and
/// ((n+1)^{−αθ}Σ_{ν≤n+1} ν^{αθ−1}ε_ν^θ)^{1/θ} ≍ ω(1/(n+1)).
///
/// Blocks double n^α ω(1/n): n_{s+1} = min{N > n_s : N^α ω(1/N) >
/// 2 n_s^α ω(1/n_s)}, and ε_n = ω(1/n_{s+1}) on [n_s, n_{s+1}). A trailing
/// block without successor uses ε_n = ω(1/(n+1)) and sets `fallback`. Slot 0
/// holds ε_0 = ω(1). Fails when the recorded constants leave [10⁻³, 10³].
pub fn q_lower_sequence(
    w: &Majorant,
    alpha: f64,
    theta: f64,
    n_max: usize,
) -> Result<BlockSequence> {
    check_args(alpha, theta, n_max)?;
    let n_ext = n_max.saturating_mul(SEQUENCE_HORIZON);
    let q = |n: usize| (n as f64).powf(alpha) * w.eval(1.0 / n as f64);
    let mut starts = vec![1usize];
    let mut s = 1usize;
    let mut n = 2usize;
    while n <= n_ext {
        let target = 2.0 * q(s);
        while n <= n_ext && q(n) <= target {
            n += 1;
        }
        if n > n_ext {
            break;
        }
        starts.push(n);
        s = n;
        n += 1;
    }
    let mut eps = vec![0.0; n_max + 1];
    eps[0] = w.eval(1.0);
    let mut fallback = false;
    for (i, &b) in starts.iter().enumerate() {
        if b > n_max {
            break;
        }
        match starts.get(i + 1) {
            Some(&next) => {
                let v = w.eval(1.0 / next as f64);
                for slot in eps.iter_mut().take((next).min(n_max + 1)).skip(b) {
                    *slot = v;
                }
            }
            None => {
                fallback = true;
                for (m, slot) in eps.iter_mut().enumerate().skip(b) {
                    *slot = w.eval(1.0 / (m + 1) as f64);
                }
            }
        }
    }
    // Rounding guards: ε_n ≤ ω(1/(n+1)) and ε non-increasing.
    for m in 1..=n_max {
        eps[m] = eps[m].min(w.eval(1.0 / (m + 1) as f64)).min(eps[m - 1]);
    }
    if eps[1..].iter().any(|v| !(*v > 0.0)) {
        return Err(Error::SequenceDiagnostic("majorant vanishes on 1/n".into()));
    }
    let at = alpha * theta;
    let mut prefix = 0.0;
    let mut lower = f64::INFINITY;
    let mut upper = 0.0_f64;
    for k in 1..=n_max {
        let kf = k as f64;
        prefix += kf.powf(at - 1.0) * eps[k].powf(theta);
        let ratio = (kf.powf(-at) * prefix).powf(1.0 / theta) / w.eval(1.0 / kf);
        lower = lower.min(ratio);
        upper = upper.max(ratio);
    }
    if upper > MAX_RATIO_BOUND || lower < 1.0 / MAX_RATIO_BOUND {
        return Err(Error::SequenceDiagnostic(format!(
            "comparison constants [{lower:e}, {upper:e}] exceed 1e3; unsuitable majorant"
        )));
    }
    starts.retain(|&b| b <= n_max);
    Ok(BlockSequence {
        values: eps,
        breakpoints: starts,
        lower,
        upper,
        fallback,
    })
}

fn check_args(alpha: f64, theta: f64, n_max: usize) -> Result<()> {
    if !(alpha > 0.0) || !(theta > 0.0) {
        return Err(invalid("order and θ must be positive"));
    }
    if n_max < 2 {
        return Err(invalid("n_max must be at least 2"));
    }
    Ok(())
}
