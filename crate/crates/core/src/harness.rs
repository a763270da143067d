//! Inequality suites: each suite pairs an estimate with a corpus of
//! functions, evaluates both sides through the other modules and reports the
//! ratio lhs/rhs per (case, n, p, α) cell.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bestapprox::{l1_lower_bound, lacunary_tail, BestApproximator};
use crate::embeddings::{integral_functional, Functional, FunctionalParams, ModulusCurve};
use crate::error::{invalid, Error, Result};
use crate::fit::log_log_slope;
use crate::gallery::{build_gallery, GalleryParams, Witness};
use crate::sequences::SequenceDescriptor;
use crate::smoothness::{modulus, realization, Mean, ModulusConfig};
use crate::transforms::{
    conjugate, lambda_beta_transform, multiplier_bound_mu, partial_sum, vallee_poussin,
    weyl_derivative, MultiplierSpec,
};
use crate::trigpoly::TrigPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteId {
    M1,
    M2,
    Jackson,
    NearBest,
    Zv,
    A1,
    A2,
    A3,
    A4,
    B1,
    B2,
    C1,
    Lemma2,
    Lemma3,
    Lemma4,
    Lemma5,
    Lemma6,
    Lemma7,
    B3,
    Weyl,
    Cor4,
    Cor5,
    Cor6,
    Cor7,
}

impl SuiteId {
    pub const ALL: [SuiteId; 24] = [
        SuiteId::M1,
        SuiteId::M2,
        SuiteId::Jackson,
        SuiteId::NearBest,
        SuiteId::Zv,
        SuiteId::A1,
        SuiteId::A2,
        SuiteId::A3,
        SuiteId::A4,
        SuiteId::B1,
        SuiteId::B2,
        SuiteId::C1,
        SuiteId::Lemma2,
        SuiteId::Lemma3,
        SuiteId::Lemma4,
        SuiteId::Lemma5,
        SuiteId::Lemma6,
        SuiteId::Lemma7,
        SuiteId::B3,
        SuiteId::Weyl,
        SuiteId::Cor4,
        SuiteId::Cor5,
        SuiteId::Cor6,
        SuiteId::Cor7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::M1 => "m1",
            SuiteId::M2 => "m2",
            SuiteId::Jackson => "jackson",
            SuiteId::NearBest => "near_best",
            SuiteId::Zv => "zv",
            SuiteId::A1 => "a1",
            SuiteId::A2 => "a2",
            SuiteId::A3 => "a3",
            SuiteId::A4 => "a4",
            SuiteId::B1 => "b1",
            SuiteId::B2 => "b2",
            SuiteId::C1 => "c1",
            SuiteId::Lemma2 => "lemma2",
            SuiteId::Lemma3 => "lemma3",
            SuiteId::Lemma4 => "lemma4",
            SuiteId::Lemma5 => "lemma5",
            SuiteId::Lemma6 => "lemma6",
            SuiteId::Lemma7 => "lemma7",
            SuiteId::B3 => "b3",
            SuiteId::Weyl => "weyl",
            SuiteId::Cor4 => "cor4",
            SuiteId::Cor5 => "cor5",
            SuiteId::Cor6 => "cor6",
            SuiteId::Cor7 => "cor7",
        }
    }

    /// Frequency scale of a cell: the block suites index n by the dyadic
    /// block 2ⁿ.
    pub fn frequency(self, n: usize) -> usize {
        match self {
            SuiteId::Lemma4 | SuiteId::Lemma6 | SuiteId::Lemma7 => 1 << n,
            _ => n,
        }
    }

    /// Suites whose ratio must also stay away from zero. `B3` is two-sided
    /// only at p = 2, where θ = τ.
    pub fn two_sided(self, p_list: &[f64]) -> bool {
        match self {
            SuiteId::M1 | SuiteId::M2 | SuiteId::Lemma4 | SuiteId::Lemma6 | SuiteId::Lemma7 => true,
            SuiteId::B3 => p_list.iter().all(|&p| p == 2.0),
            _ => false,
        }
    }
}

impl std::str::FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        SuiteId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == key)
            .ok_or_else(|| invalid(format!("unknown suite {s}")))
    }
}

/// A corpus function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusEntry {
    Poly {
        id: String,
        poly: TrigPoly,
    },
    Gallery {
        id: String,
        which: Witness,
        #[serde(default)]
        params: GalleryParams,
        trunc: usize,
    },
    /// Coefficients uniform in [−1, 1] up to `degree`; with `lacunary`, only
    /// frequencies 2^ν with cosine coefficients 2^{−ν/2}·U[1/2, 1].
    Random {
        id: String,
        seed: u64,
        degree: usize,
        #[serde(default)]
        lacunary: bool,
    },
}

impl CorpusEntry {
    pub fn id(&self) -> &str {
        match self {
            CorpusEntry::Poly { id, .. }
            | CorpusEntry::Gallery { id, .. }
            | CorpusEntry::Random { id, .. } => id,
        }
    }

    pub fn resolve(&self) -> Result<TrigPoly> {
        match self {
            CorpusEntry::Poly { poly, .. } => Ok(poly.clone()),
            CorpusEntry::Gallery {
                which,
                params,
                trunc,
                ..
            } => Ok(build_gallery(*which, params, *trunc)?.poly),
            CorpusEntry::Random {
                seed,
                degree,
                lacunary,
                ..
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                if *lacunary {
                    let mut f = TrigPoly::zero();
                    let mut k = 1usize;
                    let mut nu = 0;
                    while k <= *degree {
                        f.add_term(
                            k,
                            2f64.powf(-0.5 * nu as f64) * rng.gen_range(0.5..1.0),
                            0.0,
                        );
                        k *= 2;
                        nu += 1;
                    }
                    Ok(f)
                } else {
                    let a: Vec<f64> = (0..*degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let b: Vec<f64> = (0..*degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    Ok(TrigPoly::from_coeffs(&a, &b))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: String,
    pub format: Format,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub suite: SuiteId,
    pub corpus: Vec<CorpusEntry>,
    pub n_range: Vec<usize>,
    #[serde(with = "crate::exponent::vec")]
    pub p_list: Vec<f64>,
    /// Orders α (k); for `Lemma3` the exponents r of λ_ν = ν^r.
    pub alpha_list: Vec<f64>,
    /// Derivative order r (ρ for `Cor5`).
    #[serde(default = "one")]
    pub r: f64,
    /// Order surplus ε of `Cor6`.
    #[serde(default = "half")]
    pub eps: f64,
    /// Cells with n above this fraction of a function's degree are skipped.
    #[serde(default)]
    pub degree_window: Option<f64>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Ok,
    SolverFail,
    PrecondFail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::SolverFail => "SOLVER_FAIL",
            Status::PrecondFail => "PRECOND_FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub suite_id: SuiteId,
    pub case_id: String,
    pub n: usize,
    #[serde(with = "crate::exponent")]
    pub p: f64,
    pub alpha: f64,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    pub status: Status,
    pub diagnostics: BTreeMap<String, String>,
}

impl RatioReport {
    pub fn is_degenerate(&self) -> bool {
        self.diagnostics.contains_key("DEGENERATE")
    }
}

fn dyadic(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

fn gallery(id: &str, which: Witness, params: GalleryParams, trunc: usize) -> CorpusEntry {
    CorpusEntry::Gallery {
        id: id.to_string(),
        which,
        params,
        trunc,
    }
}

fn poly(id: &str, poly: TrigPoly) -> CorpusEntry {
    CorpusEntry::Poly {
        id: id.to_string(),
        poly,
    }
}

fn eps_table(len: usize, power: f64) -> Vec<f64> {
    (1..=len).map(|n| (n as f64).powf(-power)).collect()
}

/// Default fraction of the degree up to which a truncation stands in for
/// its infinite witness.
pub const DEGREE_WINDOW: f64 = 0.25;

/// The general corpus: a short polynomial and truncated witnesses of low order.
pub fn standard_corpus() -> Vec<CorpusEntry> {
    use crate::sequences::Majorant;
    vec![
        poly(
            "trig",
            TrigPoly::from_terms([(1, 1.0, 0.0), (3, 0.0, 0.5), (5, -0.25, 0.0), (8, 0.0, 0.1)]),
        ),
        gallery(
            "f1",
            Witness::F1,
            GalleryParams::with_omega(Majorant::power(1.5), 2.0, 0.0, 2.0),
            6,
        ),
        gallery(
            "f6",
            Witness::F6,
            GalleryParams::with_eps(eps_table(64, 1.5)),
            64,
        ),
        gallery(
            "f7",
            Witness::F7,
            GalleryParams::with_eps(eps_table(64, 1.5)),
            64,
        ),
        gallery(
            "f9",
            Witness::F9,
            GalleryParams::with_omega(Majorant::power(1.5), 2.0, 0.0, f64::INFINITY),
            6,
        ),
    ]
}

fn lacunary_corpus() -> Vec<CorpusEntry> {
    use crate::sequences::Majorant;
    vec![
        gallery(
            "f1",
            Witness::F1,
            GalleryParams::with_omega(Majorant::power(0.5), 1.0, 0.0, 2.0),
            6,
        ),
        gallery(
            "f9",
            Witness::F9,
            GalleryParams::with_omega(Majorant::power(0.5), 1.0, 0.0, f64::INFINITY),
            6,
        ),
        gallery(
            "f10",
            Witness::F10,
            GalleryParams::with_eps(eps_table(256, 0.5)),
            6,
        ),
        CorpusEntry::Random {
            id: "lac7".into(),
            seed: 7,
            degree: 64,
            lacunary: true,
        },
    ]
}

fn random_corpus(count: u64, degree: usize) -> Vec<CorpusEntry> {
    (1..=count)
        .map(|seed| CorpusEntry::Random {
            id: format!("rand{seed}"),
            seed,
            degree,
            lacunary: false,
        })
        .collect()
}

impl SuiteSpec {
    /// The default catalog entry for `suite`, sized so that the whole catalog
    /// runs in seconds on one core.
    pub fn default_for(suite: SuiteId) -> Self {
        let inf = f64::INFINITY;
        let std = standard_corpus;
        let sine_corpus = || {
            vec![
                std()[0].clone(),
                std()[3].clone(),
                gallery(
                    "f8",
                    Witness::F8,
                    GalleryParams::with_eps(eps_table(64, 1.5)),
                    64,
                ),
            ]
        };
        let (corpus, n_range, p_list, alpha_list, r) = match suite {
            SuiteId::M1 => (
                std(),
                dyadic(0, 7),
                vec![1.0, 2.0, inf],
                vec![0.5, 1.0, 2.0, 2.5],
                1.0,
            ),
            SuiteId::M2 => (
                std(),
                dyadic(0, 4),
                vec![1.5, 4.0],
                vec![0.5, 1.0, 2.0],
                1.0,
            ),
            SuiteId::Jackson => (
                std(),
                dyadic(0, 4),
                vec![1.0, 2.0, inf],
                vec![0.5, 1.0, 2.0],
                1.0,
            ),
            SuiteId::NearBest => (std(), dyadic(0, 4), vec![1.0, 2.0, inf], vec![1.0], 1.0),
            SuiteId::Zv => (std(), dyadic(0, 4), vec![1.5, 4.0], vec![1.0], 1.0),
            SuiteId::A1 => {
                let mut c = std();
                c.insert(0, poly("const", TrigPoly::constant(1.0)));
                (c, dyadic(0, 4), vec![1.0, inf], vec![1.0, 2.0], 1.0)
            }
            SuiteId::A2 | SuiteId::A3 | SuiteId::A4 => {
                (std(), dyadic(0, 4), vec![1.0, inf], vec![1.0, 2.0], 1.0)
            }
            SuiteId::B1 | SuiteId::B2 => (std(), dyadic(0, 4), vec![1.0, inf], vec![1.0, 2.0], 1.0),
            SuiteId::C1 => (std(), dyadic(0, 4), vec![1.0, inf], vec![2.0, 3.0], 1.0),
            SuiteId::Lemma2 => (std(), dyadic(0, 4), vec![1.0, inf], vec![1.0], 1.0),
            SuiteId::Lemma3 => (
                random_corpus(4, 16),
                vec![2, 4, 8, 16],
                vec![1.0, inf],
                vec![2.0, 1.0, 0.5, -0.5, -1.0],
                1.0,
            ),
            SuiteId::Lemma4 => (
                random_corpus(3, 128),
                (0..=6).collect(),
                vec![1.0, inf],
                vec![1.0],
                1.0,
            ),
            SuiteId::Lemma5 => (sine_corpus(), dyadic(0, 4), vec![1.0], vec![1.0], 1.0),
            SuiteId::Lemma6 => (
                lacunary_corpus(),
                (1..=6).collect(),
                vec![1.0, 1.5, 2.0, 4.0],
                vec![1.0],
                1.0,
            ),
            SuiteId::Lemma7 => (
                lacunary_corpus(),
                (1..=6).collect(),
                vec![inf],
                vec![1.0],
                1.0,
            ),
            SuiteId::B3 => (std(), dyadic(0, 4), vec![2.0], vec![1.0, 2.0], 1.0),
            SuiteId::Weyl => (std(), dyadic(0, 4), vec![1.5, 4.0], vec![0.5, 1.0], 0.5),
            SuiteId::Cor4 => (std(), dyadic(0, 4), vec![1.0, inf], vec![0.5, 1.5], 0.5),
            SuiteId::Cor5 => (std(), dyadic(0, 4), vec![1.0, inf], vec![1.0, 2.0], 1.0),
            SuiteId::Cor6 => (std(), dyadic(0, 4), vec![1.0, inf], vec![0.5, 1.0], 0.5),
            SuiteId::Cor7 => (std(), dyadic(0, 4), vec![1.0, inf], vec![0.5, 1.0], 0.5),
        };
        Self {
            suite,
            corpus,
            n_range,
            p_list,
            alpha_list,
            r,
            eps: 0.5,
            degree_window: match suite {
                SuiteId::M1
                | SuiteId::Lemma3
                | SuiteId::Lemma4
                | SuiteId::Lemma6
                | SuiteId::Lemma7 => None,
                _ => Some(DEGREE_WINDOW),
            },
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.corpus.is_empty()
            || self.n_range.is_empty()
            || self.p_list.is_empty()
            || self.alpha_list.is_empty()
        {
            return Err(invalid(
                "suite needs a corpus, an n range, exponents and orders",
            ));
        }
        if self.n_range.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n_range must be strictly ascending"));
        }
        for &p in &self.p_list {
            crate::error::check_exponent(p)?;
        }
        if self.suite != SuiteId::Lemma3 && self.alpha_list.iter().any(|a| !(*a > 0.0)) {
            return Err(invalid("orders must be positive"));
        }
        if !(self.r >= 0.0 && self.eps > 0.0) {
            return Err(invalid("r must be non-negative and ε positive"));
        }
        Ok(())
    }
}

/// Largest ν used when a sum runs to infinity over moduli of a polynomial.
pub const SUM_HORIZON: usize = 1024;

/// Shared evaluation state: interned polynomials and memoized moduli and
/// best approximations. Values do not depend on evaluation order.
#[derive(Default)]
pub struct Context {
    polys: Mutex<Vec<TrigPoly>>,
    values: Mutex<HashMap<Key, f64>>,
    approximators: Mutex<HashMap<(usize, u64), Arc<BestApproximator>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Modulus {
        f: usize,
        order: u64,
        p: u64,
        nu: usize,
    },
    Best {
        f: usize,
        p: u64,
        n: usize,
    },
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&self, f: TrigPoly) -> usize {
        let f = f.trimmed();
        let mut polys = self.polys.lock().unwrap();
        if let Some(i) = polys.iter().position(|g| *g == f) {
            return i;
        }
        polys.push(f);
        polys.len() - 1
    }

    /// Tail continuation for functions of index `f`: moduli sit on their
    /// power asymptote well beyond the degree.
    fn tail(&self, f: usize) -> Upper {
        Upper::Tail((8 * self.poly(f).degree()).clamp(64, SUM_HORIZON))
    }

    fn poly(&self, i: usize) -> TrigPoly {
        self.polys.lock().unwrap()[i].clone()
    }

    fn cached(&self, key: Key, compute: impl FnOnce() -> Result<f64>) -> Result<f64> {
        if let Some(v) = self.values.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = compute()?;
        self.values.lock().unwrap().insert(key, v);
        Ok(v)
    }

    /// ω_order(f, 1/ν)_p.
    fn omega(&self, f: usize, order: f64, p: f64, nu: usize) -> Result<f64> {
        let key = Key::Modulus {
            f,
            order: order.to_bits(),
            p: p.to_bits(),
            nu,
        };
        self.cached(key, || {
            modulus(
                &self.poly(f),
                order,
                1.0 / nu as f64,
                p,
                &ModulusConfig::default(),
            )
        })
    }

    /// E_n(f)_p on a grid fixed by f alone.
    fn best(&self, f: usize, p: f64, n: usize) -> Result<f64> {
        let g = self.poly(f);
        if g.degree() <= n {
            return Ok(0.0);
        }
        let key = Key::Best {
            f,
            p: p.to_bits(),
            n,
        };
        self.cached(key, || {
            let solver = {
                let mut map = self.approximators.lock().unwrap();
                map.entry((f, p.to_bits()))
                    .or_insert_with(|| {
                        Arc::new(
                            BestApproximator::new(&g, p, g.degree()).expect("exponent checked"),
                        )
                    })
                    .clone()
            };
            Ok(solver.solve(n, None)?.value)
        })
    }

    fn derivative(&self, f: usize, r: f64) -> Result<usize> {
        if r == 0.0 {
            return Ok(f);
        }
        Ok(self.intern(weyl_derivative(&self.poly(f), r)?))
    }

    fn conjugate_derivative(&self, f: usize, r: f64) -> Result<usize> {
        let c = self.intern(conjugate(&self.poly(f)));
        self.derivative(c, r)
    }
}

/// ν grid for bracketed sums: every integer up to 16, then round(2^{j/4}),
/// always containing `lo` and `hi`.
fn nu_grid(lo: usize, hi: usize) -> Vec<usize> {
    let mut g: Vec<usize> = (lo..=hi.min(16)).collect();
    let mut j = 17;
    loop {
        let v = 2f64.powf(j as f64 / 4.0).round() as usize;
        if v > hi {
            break;
        }
        if v >= lo {
            g.push(v);
        }
        j += 1;
    }
    g.push(lo);
    g.push(hi);
    g.sort_unstable();
    g.dedup();
    g
}

#[derive(Debug, Clone, Copy)]
enum Upper {
    To(usize),
    Tail(usize),
}

/// Σ_{ν=lo}^{hi} (ν + shift)^c q(ν) with q evaluated on [`nu_grid`] and
/// interpolated log-linearly in ν between nodes (linearly where q vanishes).
/// With [`Upper::Tail`] the sum runs to the horizon and the rest is the power
/// continuation of the last two nodes.
fn power_sum(
    lo: usize,
    hi: Upper,
    c: f64,
    shift: f64,
    mut q: impl FnMut(usize) -> Result<f64>,
) -> Result<f64> {
    let top = match hi {
        Upper::To(h) => h,
        Upper::Tail(h) => h.max(2 * lo.max(8)),
    };
    if top < lo {
        return Ok(0.0);
    }
    let w = |v: usize| (v as f64 + shift).powf(c);
    let grid = nu_grid(lo, top);
    let values: Vec<f64> = grid.iter().map(|&v| q(v)).collect::<Result<_>>()?;
    let mut total = w(lo) * values[0];
    for i in 0..grid.len() - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let (qa, qb) = (values[i], values[i + 1]);
        for v in a + 1..=b {
            let qv = if v == b {
                qb
            } else if qa > 0.0 && qb > 0.0 {
                let t = ((v as f64).ln() - (a as f64).ln()) / ((b as f64).ln() - (a as f64).ln());
                (qa.ln() + t * (qb.ln() - qa.ln())).exp()
            } else {
                qa + (qb - qa) * (v - a) as f64 / (b - a) as f64
            };
            total += w(v) * qv;
        }
    }
    if let Upper::Tail(_) = hi {
        let n = grid.len();
        let (v0, v1) = (grid[n - 2] as f64, grid[n - 1] as f64);
        let (q0, q1) = (values[n - 2], values[n - 1]);
        if q1 > 0.0 {
            if !(q0 > 0.0) {
                return Ok(f64::INFINITY);
            }
            let s = -(q1.ln() - q0.ln()) / (v1.ln() - v0.ln());
            let e = s - c - 1.0;
            if !(e > 0.0) {
                return Ok(f64::INFINITY);
            }
            total += q1 * v1.powf(s) * (v1 + 0.5).powf(-e) / e;
        }
    }
    Ok(total)
}

struct Cell {
    lhs: f64,
    rhs: f64,
    diagnostics: BTreeMap<String, String>,
}

impl Cell {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            diagnostics: BTreeMap::new(),
        }
    }

    fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.diagnostics.insert(key.to_string(), value.to_string());
        self
    }
}

struct Case {
    id: String,
    f: usize,
    part: Part,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    Whole,
    First,
    Second,
    /// `Lemma3`: the start N of the tail block.
    Start(usize),
}

fn nf(n: usize) -> f64 {
    n as f64
}

/// Evaluates one cell of `spec`.
fn evaluate(
    ctx: &Context,
    spec: &SuiteSpec,
    case: &Case,
    n: usize,
    p: f64,
    alpha: f64,
) -> Result<Cell> {
    let f = case.f;
    let r = spec.r;
    let k = alpha;
    let deg = ctx.poly(f).degree();
    let needs_n = |min: usize| -> Result<()> {
        if n < min {
            Err(Error::Precondition(format!("n = {n} is below {min}")))
        } else {
            Ok(())
        }
    };
    let cell = match spec.suite {
        SuiteId::M1 | SuiteId::M2 => {
            needs_n(1)?;
            let mean = if spec.suite == SuiteId::M1 {
                Mean::Vp
            } else {
                Mean::Partial
            };
            Cell::new(
                realization(&ctx.poly(f), alpha, n, p, mean)?,
                ctx.omega(f, alpha, p, n)?,
            )
        }
        SuiteId::Jackson | SuiteId::A1 => {
            Cell::new(ctx.best(f, p, n)?, ctx.omega(f, alpha, p, n + 1)?)
        }
        SuiteId::A2 => {
            needs_n(1)?;
            let d = ctx.derivative(f, r)?;
            Cell::new(
                ctx.best(f, p, n)?,
                nf(n).powf(-r) * ctx.omega(d, k, p, n + 1)?,
            )
            .note("r", r)
        }
        SuiteId::A3 => {
            let s = power_sum(0, Upper::To(n), k - 1.0, 1.0, |v| ctx.best(f, p, v))?;
            Cell::new(ctx.omega(f, k, p, n + 1)?, nf(n + 1).powf(-k) * s)
        }
        SuiteId::A4 => {
            let d = ctx.derivative(f, r)?;
            let near = power_sum(0, Upper::To(n), k + r - 1.0, 1.0, |v| ctx.best(f, p, v))?;
            let far = power_sum(n + 1, Upper::To(deg), r - 1.0, 1.0, |v| ctx.best(f, p, v))?;
            Cell::new(ctx.omega(d, k, p, n + 1)?, nf(n + 1).powf(-k) * near + far).note("r", r)
        }
        SuiteId::B1 => b1_cell(ctx, f, n, p, k, r)?,
        SuiteId::B2 => b2_cell(ctx, f, n, p, k, r)?,
        SuiteId::Cor4 => match case.part {
            Part::First => b1_cell(ctx, f, n, p, k, r)?,
            _ => b2_cell(ctx, f, n, p, k, r)?,
        },
        SuiteId::C1 => {
            needs_n(1)?;
            let c = ctx.conjugate_derivative(f, r)?;
            let near = power_sum(1, Upper::To(n), k + r - 1.0, 0.0, |v| ctx.omega(f, k, p, v))?;
            let far = power_sum(n + 1, ctx.tail(f), r - 1.0, 0.0, |v| ctx.omega(f, k, p, v))?;
            Cell::new(ctx.omega(c, k, p, n)?, nf(n).powf(-k) * near + far).note("r", r)
        }
        SuiteId::NearBest => {
            needs_n(1)?;
            let g = ctx.poly(f);
            Cell::new((&g - &vallee_poussin(&g, n)?).norm(p)?, ctx.best(f, p, n)?)
        }
        SuiteId::Zv => {
            let g = ctx.poly(f);
            Cell::new((&g - &partial_sum(&g, n)).norm(p)?, ctx.best(f, p, n)?)
        }
        SuiteId::Lemma2 => {
            let c = ctx.intern(conjugate(&ctx.poly(f)));
            let tail = power_sum(n + 1, Upper::To(deg), -1.0, 0.0, |v| ctx.best(f, p, v))?;
            Cell::new(ctx.best(c, p, n)?, ctx.best(f, p, n)? + tail)
        }
        SuiteId::Lemma3 => {
            let Part::Start(start) = case.part else {
                return Err(invalid("lemma3 cases carry their block start"));
            };
            if n <= start {
                return Err(Error::Precondition(format!(
                    "M = {n} must exceed N = {start}"
                )));
            }
            let lambda = SequenceDescriptor::power(alpha);
            let block = ctx.poly(f).fourier_block(start + 1, n);
            let transformed =
                lambda_beta_transform(&block, &MultiplierSpec::new(lambda.clone(), 0.0))?;
            let mu = multiplier_bound_mu(&lambda, n, start)?;
            Cell::new(transformed.norm(p)?, mu * block.norm(p)?)
                .note("N", start)
                .note("mu", mu)
        }
        SuiteId::Lemma4 => {
            let block = ctx.poly(f).fourier_block(1 << n, 1 << (n + 1));
            Cell::new(block.norm(p)?, conjugate(&block).norm(p)?)
        }
        SuiteId::Lemma5 => {
            if p != 1.0 {
                return Err(Error::Precondition("lemma5 is an L1 estimate".into()));
            }
            Cell::new(l1_lower_bound(&ctx.poly(f), n), ctx.best(f, 1.0, n)?)
        }
        SuiteId::Lemma6 => {
            let g = partial_sum(&ctx.poly(f), 1 << n).fourier_block(1, 1 << n);
            let l2: f64 = g
                .harmonics()
                .map(|(_, a, b)| a * a + b * b)
                .sum::<f64>()
                .sqrt();
            Cell::new(g.norm(p)?, l2)
        }
        SuiteId::Lemma7 => {
            if p.is_finite() {
                return Err(Error::Precondition("lemma7 is a uniform estimate".into()));
            }
            Cell::new(
                ctx.best(f, p, (1 << n) - 1)?,
                lacunary_tail(&ctx.poly(f), n)?,
            )
        }
        SuiteId::B3 => {
            needs_n(1)?;
            let theta = p.min(2.0);
            let d = ctx.derivative(f, r)?;
            let s = power_sum(n + 1, ctx.tail(f), r * theta - 1.0, 0.0, |v| {
                Ok(ctx.omega(f, k + r, p, v)?.powf(theta))
            })?;
            Cell::new(ctx.omega(d, k, p, n)?, s.powf(1.0 / theta)).note("theta", theta)
        }
        SuiteId::Weyl => {
            needs_n(1)?;
            let d = ctx.derivative(f, r)?;
            let grid = nu_grid(1, SUM_HORIZON);
            let mut t = Vec::with_capacity(grid.len());
            let mut w = Vec::with_capacity(grid.len());
            for &v in grid.iter().rev() {
                t.push(1.0 / nf(v));
                w.push(ctx.omega(f, r + alpha, p, v)?);
            }
            let mut run = 0.0_f64;
            for x in &mut w {
                run = run.max(*x);
                *x = run;
            }
            let curve = ModulusCurve::new(t, w)?;
            let rhs = integral_functional(
                Functional::Weyl1Upper,
                &curve,
                &FunctionalParams::new(p, alpha, r, 1.0 / nf(n)),
            )?;
            Cell::new(ctx.omega(d, alpha, p, n)?, rhs).note("r", r)
        }
        SuiteId::Cor5 => {
            let c = ctx.conjugate_derivative(f, r)?;
            let s = power_sum(n + 1, ctx.tail(f), r - 1.0, 0.0, |v| {
                ctx.omega(f, alpha + r, p, v)
            })?;
            Cell::new(ctx.best(c, p, n)?, s).note("rho", r)
        }
        SuiteId::Cor6 => {
            needs_n(1)?;
            let c = ctx.conjugate_derivative(f, r)?;
            let order = r + alpha + spec.eps;
            match case.part {
                Part::First => {
                    let near = power_sum(1, Upper::To(n), r + alpha - 1.0, 0.0, |v| {
                        ctx.omega(f, order, p, v)
                    })?;
                    let far = power_sum(n + 1, ctx.tail(f), r - 1.0, 0.0, |v| {
                        ctx.omega(f, order, p, v)
                    })?;
                    Cell::new(ctx.omega(c, alpha, p, n)?, nf(n).powf(-alpha) * near + far)
                }
                _ => Cell::new(
                    ctx.omega(f, order, p, n)?,
                    nf(n).powf(-r) * ctx.omega(c, alpha, p, n)?,
                ),
            }
            .note("r", r)
            .note("eps", spec.eps)
        }
        SuiteId::Cor7 => {
            needs_n(1)?;
            let c = ctx.conjugate_derivative(f, r)?;
            let near = power_sum(1, Upper::To(n), r + alpha - 1.0, 0.0, |v| ctx.best(f, p, v))?;
            let far = power_sum(n + 1, Upper::To(deg), r - 1.0, 0.0, |v| ctx.best(f, p, v))?;
            Cell::new(ctx.omega(c, alpha, p, n)?, nf(n).powf(-alpha) * near + far).note("r", r)
        }
    };
    Ok(cell)
}

fn b1_cell(ctx: &Context, f: usize, n: usize, p: f64, k: f64, r: f64) -> Result<Cell> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let d = ctx.derivative(f, r)?;
    Ok(Cell::new(
        ctx.omega(f, k + r, p, n)?,
        nf(n).powf(-r) * ctx.omega(d, k, p, n)?,
    )
    .note("r", r))
}

fn b2_cell(ctx: &Context, f: usize, n: usize, p: f64, k: f64, r: f64) -> Result<Cell> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let d = ctx.derivative(f, r)?;
    let s = power_sum(n + 1, ctx.tail(f), r - 1.0, 0.0, |v| {
        ctx.omega(f, k + r, p, v)
    })?;
    Ok(Cell::new(ctx.omega(d, k, p, n)?, s).note("r", r))
}

/// Relative size below which a side is treated as zero when the other one
/// vanishes exactly.
const ZERO_TOL: f64 = 1e-12;

fn report(
    spec: &SuiteSpec,
    case: &Case,
    n: usize,
    p: f64,
    alpha: f64,
    scale: f64,
    result: Result<Cell>,
) -> RatioReport {
    let mut out = RatioReport {
        suite_id: spec.suite,
        case_id: case.id.clone(),
        n,
        p,
        alpha,
        lhs: None,
        rhs: None,
        ratio: None,
        status: Status::Ok,
        diagnostics: BTreeMap::new(),
    };
    match result {
        Ok(cell) => {
            out.diagnostics = cell.diagnostics;
            let (lhs, rhs) = (cell.lhs, cell.rhs);
            let tiny = ZERO_TOL * scale.max(f64::MIN_POSITIVE);
            let ratio = if rhs > 0.0 {
                lhs / rhs
            } else if lhs.abs() <= tiny {
                out.diagnostics.insert("DEGENERATE".into(), "0/0".into());
                1.0
            } else {
                f64::INFINITY
            };
            out.lhs = Some(lhs);
            out.rhs = Some(rhs);
            out.ratio = Some(ratio);
        }
        Err(e) => {
            out.status = match e {
                Error::SolverFailed { .. } | Error::GridTooCoarse { .. } => Status::SolverFail,
                _ => Status::PrecondFail,
            };
            out.diagnostics.insert("error".into(), e.to_string());
        }
    }
    out
}

fn cases(ctx: &Context, spec: &SuiteSpec) -> Result<Vec<(Case, f64)>> {
    let mut out = Vec::new();
    for entry in &spec.corpus {
        let f = entry.resolve()?;
        let scale = f.coefficient_abs_sum() + f.a0_half().abs();
        let idx = ctx.intern(f);
        let id = entry.id().to_string();
        if id.contains(',') || id.contains('"') || id.contains('\n') {
            return Err(invalid(format!(
                "case id {id:?} may not contain commas, quotes or newlines"
            )));
        }
        match spec.suite {
            SuiteId::Cor4 => {
                out.push((
                    Case {
                        id: format!("{id}/b1"),
                        f: idx,
                        part: Part::First,
                    },
                    scale,
                ));
                out.push((
                    Case {
                        id: format!("{id}/b2"),
                        f: idx,
                        part: Part::Second,
                    },
                    scale,
                ));
            }
            SuiteId::Cor6 => {
                out.push((
                    Case {
                        id: format!("{id}/i"),
                        f: idx,
                        part: Part::First,
                    },
                    scale,
                ));
                out.push((
                    Case {
                        id: format!("{id}/b5"),
                        f: idx,
                        part: Part::Second,
                    },
                    scale,
                ));
            }
            SuiteId::Lemma3 => {
                let top = *spec.n_range.last().unwrap();
                let mut starts: Vec<usize> = spec
                    .n_range
                    .iter()
                    .flat_map(|&m| [0, m / 2, m.saturating_sub(1)])
                    .filter(|&s| s < top)
                    .collect();
                starts.sort_unstable();
                starts.dedup();
                for s in starts {
                    out.push((
                        Case {
                            id: format!("{id}/N{s:02}"),
                            f: idx,
                            part: Part::Start(s),
                        },
                        scale,
                    ));
                }
            }
            _ => out.push((
                Case {
                    id,
                    f: idx,
                    part: Part::Whole,
                },
                scale,
            )),
        }
    }
    Ok(out)
}

fn sort_reports(reports: &mut [RatioReport]) {
    reports.sort_by(|x, y| {
        (x.suite_id.name(), &x.case_id, x.n)
            .cmp(&(y.suite_id.name(), &y.case_id, y.n))
            .then(x.p.total_cmp(&y.p))
            .then(x.alpha.total_cmp(&y.alpha))
    });
}

/// Runs `spec`, one report per (case, n, p, α) cell; failures are recorded
/// per cell. Errors only for specs that do not resolve.
pub fn run_suite(spec: &SuiteSpec) -> Result<Vec<RatioReport>> {
    run_suite_with(&Context::new(), spec)
}

pub fn run_suite_with(ctx: &Context, spec: &SuiteSpec) -> Result<Vec<RatioReport>> {
    spec.validate()?;
    let cases = cases(ctx, spec)?;
    let mut cells = Vec::new();
    for (ci, (case, _)) in cases.iter().enumerate() {
        let degree = ctx.poly(case.f).degree();
        for &n in &spec.n_range {
            if let Some(w) = spec.degree_window {
                if degree > 0 && n as f64 > w * degree as f64 {
                    continue;
                }
            }
            if let Part::Start(s) = case.part {
                if n <= s {
                    continue;
                }
            }
            for &p in &spec.p_list {
                for &alpha in &spec.alpha_list {
                    cells.push((ci, n, p, alpha));
                }
            }
        }
    }
    let mut reports: Vec<RatioReport> = cells
        .par_iter()
        .map(|&(ci, n, p, alpha)| {
            let (case, scale) = &cases[ci];
            report(
                spec,
                case,
                n,
                p,
                alpha,
                *scale,
                evaluate(ctx, spec, case, n, p, alpha),
            )
        })
        .collect();
    sort_reports(&mut reports);
    Ok(reports)
}

/// Runs several suites over one shared [`Context`], reports sorted by suite.
pub fn run_catalog(specs: &[SuiteSpec]) -> Result<Vec<RatioReport>> {
    let ctx = Context::new();
    let mut all = Vec::new();
    for spec in specs {
        all.extend(run_suite_with(&ctx, spec)?);
    }
    sort_reports(&mut all);
    Ok(all)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub cells: usize,
    pub ok: usize,
    pub degenerate: usize,
    pub solver_fail: usize,
    pub precond_fail: usize,
    pub two_sided: bool,
    pub k_sup: Option<f64>,
    pub k_inf: Option<f64>,
    /// Log-log slope of the per-n sup of the ratio against n.
    pub slope: Option<f64>,
    /// Log-log slope of the per-n envelope max(sup, 1/inf) against n.
    pub envelope_slope: Option<f64>,
    /// inf of the ratio over the lower half of the n range.
    pub k_inf_half: Option<f64>,
    pub pass: bool,
    pub causes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub per_suite: BTreeMap<String, SuiteSummary>,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.per_suite.values().all(|s| s.pass)
    }
}

/// One-sided gate on the trend of sup ratio against n.
pub const SLOPE_GATE: f64 = 0.02;
/// Two-sided floor on inf ratio.
pub const INF_FLOOR: f64 = 1e-3;
/// Allowed relative drop of inf ratio when the n range is doubled.
pub const INF_STABILITY: f64 = 0.10;

/// Log-log slope of the running envelope K(n) = max_{n' ≤ n} v(n'), fitted
/// over the upper half of the n range on a log scale.
fn slope_of(points: &BTreeMap<usize, f64>) -> Option<f64> {
    let mut running = f64::NEG_INFINITY;
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(&n, &v)| n > 0 && v > 0.0 && v.is_finite())
        .map(|(&n, &v)| {
            running = running.max(v);
            (n as f64, running)
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let mid = (pts[0].0 * pts[pts.len() - 1].0).sqrt();
    let mut upper: Vec<(f64, f64)> = pts
        .iter()
        .copied()
        .filter(|p| p.0 >= mid * (1.0 - 1e-12))
        .collect();
    if upper.len() < 2 {
        upper = pts[pts.len() - 2..].to_vec();
    }
    let (ns, vs): (Vec<f64>, Vec<f64>) = upper.into_iter().unzip();
    log_log_slope(&ns, &vs)
}

/// Per-suite sup, inf, trend slope and pass flag.
pub fn summarize(reports: &[RatioReport]) -> Summary {
    let mut groups: BTreeMap<SuiteId, Vec<&RatioReport>> = BTreeMap::new();
    for r in reports {
        groups.entry(r.suite_id).or_default().push(r);
    }
    let mut per_suite = BTreeMap::new();
    for (id, rs) in groups {
        let mut ps: Vec<f64> = rs.iter().map(|r| r.p).collect();
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        let two_sided = id.two_sided(&ps);
        let ok: Vec<&&RatioReport> = rs.iter().filter(|r| r.status == Status::Ok).collect();
        let live: Vec<(usize, f64)> = ok
            .iter()
            .filter(|r| !r.is_degenerate())
            .filter_map(|r| r.ratio.map(|q| (id.frequency(r.n), q)))
            .collect();
        let mut sup_n: BTreeMap<usize, f64> = BTreeMap::new();
        let mut inf_n: BTreeMap<usize, f64> = BTreeMap::new();
        for &(n, q) in &live {
            let s = sup_n.entry(n).or_insert(f64::NEG_INFINITY);
            *s = s.max(q);
            let i = inf_n.entry(n).or_insert(f64::INFINITY);
            *i = i.min(q);
        }
        let k_sup = live
            .iter()
            .map(|x| x.1)
            .fold(None, |m: Option<f64>, q| Some(m.map_or(q, |m| m.max(q))));
        let k_inf = live
            .iter()
            .map(|x| x.1)
            .fold(None, |m: Option<f64>, q| Some(m.map_or(q, |m| m.min(q))));
        let n_top = live.iter().map(|x| x.0).max().unwrap_or(0);
        let k_inf_half = live
            .iter()
            .filter(|x| 2 * x.0 <= n_top)
            .map(|x| x.1)
            .fold(None, |m: Option<f64>, q| Some(m.map_or(q, |m| m.min(q))));
        let envelope: BTreeMap<usize, f64> = sup_n
            .iter()
            .map(|(&n, &s)| (n, s.max(1.0 / inf_n[&n])))
            .collect();
        let slope = slope_of(&sup_n);
        let envelope_slope = slope_of(&envelope);
        let count = |s: Status| rs.iter().filter(|r| r.status == s).count();
        let (solver_fail, precond_fail) = (count(Status::SolverFail), count(Status::PrecondFail));
        let mut causes = Vec::new();
        if solver_fail > 0 {
            causes.push(format!("{solver_fail} SOLVER_FAIL cells"));
        }
        if precond_fail > 0 {
            causes.push(format!("{precond_fail} PRECOND_FAIL cells"));
        }
        match k_sup {
            Some(k) if k.is_finite() => {}
            Some(_) => causes.push("unbounded ratio".into()),
            None => causes.push("no live cells".into()),
        }
        if let Some(s) = slope {
            if s > SLOPE_GATE {
                causes.push(format!("sup ratio slope {s:.4} above {SLOPE_GATE}"));
            }
        }
        if two_sided {
            match k_inf {
                Some(k) if k >= INF_FLOOR => {}
                Some(k) => causes.push(format!("inf ratio {k:e} below {INF_FLOOR}")),
                None => {}
            }
            if let (Some(all), Some(half)) = (k_inf, k_inf_half) {
                if all < (1.0 - INF_STABILITY) * half {
                    causes.push(format!(
                        "inf ratio dropped from {half:.4} to {all:.4} under n doubling"
                    ));
                }
            }
        }
        per_suite.insert(
            id.name().to_string(),
            SuiteSummary {
                cells: rs.len(),
                ok: ok.len(),
                degenerate: ok.iter().filter(|r| r.is_degenerate()).count(),
                solver_fail,
                precond_fail,
                two_sided,
                k_sup,
                k_inf,
                slope,
                envelope_slope,
                k_inf_half,
                pass: causes.is_empty(),
                causes,
            },
        );
    }
    Summary { per_suite }
}

/// Shortest round-trip decimal; ∞ and NaN spelled out.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

pub const CSV_HEADER: &str = "suite,case_id,n,p,alpha,lhs,rhs,ratio,status";

pub fn to_csv(reports: &[RatioReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.suite_id.name(),
            r.case_id,
            r.n,
            format_f64(r.p),
            format_f64(r.alpha),
            opt(r.lhs),
            opt(r.rhs),
            opt(r.ratio),
            r.status.as_str()
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutput {
    pub reports: Vec<RatioReport>,
    pub summary: Summary,
}

/// Overrides read by `verify --config`: per-suite specs replacing the
/// defaults, keyed by suite name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    #[serde(default)]
    pub suites: BTreeMap<String, SuiteSpec>,
}

impl VerifyConfig {
    pub fn spec_for(&self, id: SuiteId) -> SuiteSpec {
        self.suites
            .get(id.name())
            .cloned()
            .unwrap_or_else(|| SuiteSpec::default_for(id))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, spec) in &self.suites {
            let id: SuiteId = name.parse()?;
            if id != spec.suite {
                return Err(invalid(format!(
                    "config key {name} holds a {} spec",
                    spec.suite.name()
                )));
            }
            spec.validate()?;
        }
        Ok(())
    }
}
