//! Best trigonometric approximation E_n(f)_p on a uniform grid, and the
//! lower-bound functionals for E_n(f)_1 and lacunary series at p = ∞.
//!
//! For p ≠ 2 the minimum is taken over the grid x_i = 2πi/m with
//! m = 2^k ≥ max(512, 8(N+1), 32(n+1)): discrete Remez exchange for p = ∞
//! (Lawson iteration as fallback), a primal-dual interior-point method for
//! p = 1 and iteratively reweighted least squares otherwise. p = 2 is exact
//! by orthogonality.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{check_exponent, Error, Result};
use crate::transforms::partial_sum;
use crate::trigpoly::{fft_forward, grid_norm, TrigPoly};

/// Which solver produced an approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Orthogonal,
    Remez,
    Lawson,
    Irls,
    InteriorPoint,
    ZeroApproximant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    /// E_n(f)_p; for p ≠ 2 the grid norm of f − argmin.
    pub value: f64,
    pub argmin: TrigPoly,
    pub method: Method,
    pub iterations: usize,
    /// A certified lower bound for the grid optimum when the solver has one
    /// (levelled reference error for Remez, weighted residual for Lawson, dual
    /// objective for the interior-point method).
    pub lower_bound: Option<f64>,
    /// Grid size used; 0 for the exact p = 2 route.
    pub grid_points: usize,
}

/// E_n(f)_2 = (π Σ_{ν>n}(a_ν² + b_ν²))^{1/2}.
pub fn best_approx_l2(f: &TrigPoly, n: usize) -> f64 {
    let s: f64 = f
        .harmonics()
        .filter(|(k, _, _)| *k > n)
        .map(|(_, a, b)| a * a + b * b)
        .sum();
    (PI * s).sqrt()
}

/// Grid size for approximating a degree-N polynomial from T_n.
pub fn approximation_grid(degree: usize, n: usize) -> usize {
    (8 * (degree + 1))
        .max(32 * (n + 1))
        .max(512)
        .next_power_of_two()
}

/// E_n(f)_p with its minimizer.
pub fn best_approx(f: &TrigPoly, n: usize, p: f64) -> Result<Approximation> {
    check_exponent(p)?;
    BestApproximator::new(f, p, n)?.solve(n, None)
}

/// Solver bound to one function, exponent and grid, so that a sweep over n
/// compares like with like.
#[derive(Debug, Clone)]
pub struct BestApproximator {
    f: TrigPoly,
    p: f64,
    m: usize,
    values: Vec<f64>,
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

impl BestApproximator {
    /// Prepares a grid large enough for every n ≤ `n_max`.
    pub fn new(f: &TrigPoly, p: f64, n_max: usize) -> Result<Self> {
        Self::with_grid(f, p, approximation_grid(f.trimmed().degree(), n_max))
    }

    /// Prepares an explicit m-point grid.
    pub fn with_grid(f: &TrigPoly, p: f64, m: usize) -> Result<Self> {
        check_exponent(p)?;
        let f = f.trimmed();
        let step = 2.0 * PI / m as f64;
        let (sin_table, cos_table) = (0..m).map(|t| (step * t as f64).sin_cos()).unzip();
        Ok(Self {
            values: f.sample(m),
            f,
            p,
            m,
            cos_table,
            sin_table,
        })
    }

    pub fn grid_points(&self) -> usize {
        self.m
    }

    /// E_0..E_{n_max}, non-increasing in n by construction: every argmin
    /// from T_n is a candidate for n + 1.
    pub fn sequence(&self, n_max: usize) -> Result<Vec<Approximation>> {
        let mut out: Vec<Approximation> = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let prev = out.last();
            let mut next = self.solve(n, prev.map(|a| &a.argmin))?;
            if let Some(prev) = prev {
                if prev.value < next.value {
                    next.value = prev.value;
                    next.argmin = prev.argmin.clone();
                }
            }
            out.push(next);
        }
        Ok(out)
    }

    /// E_n on this grid, optionally warm-started from `start`.
    pub fn solve(&self, n: usize, start: Option<&TrigPoly>) -> Result<Approximation> {
        if 32 * (n + 1) > self.m {
            return Err(Error::GridTooCoarse {
                m: self.m,
                degree: n,
                required: (32 * (n + 1)).next_power_of_two(),
            });
        }
        if self.f.degree() <= n {
            return Ok(Approximation {
                value: 0.0,
                argmin: self.f.clone(),
                method: Method::Exact,
                iterations: 0,
                lower_bound: Some(0.0),
                grid_points: if self.p == 2.0 { 0 } else { self.m },
            });
        }
        if self.p == 2.0 {
            return Ok(Approximation {
                value: best_approx_l2(&self.f, n),
                argmin: partial_sum(&self.f, n),
                method: Method::Orthogonal,
                iterations: 0,
                lower_bound: None,
                grid_points: 0,
            });
        }
        if self.p.is_infinite() && n == 0 {
            let hi = self
                .values
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
            return Ok(Approximation {
                value: 0.5 * (hi - lo),
                argmin: TrigPoly::constant(0.5 * (hi + lo)),
                method: Method::Exact,
                iterations: 0,
                lower_bound: Some(0.5 * (hi - lo)),
                grid_points: self.m,
            });
        }
        let sol = if self.p.is_infinite() {
            match self.remez(n) {
                Some(a) => Ok(a),
                None => self.lawson(n),
            }
        } else if self.p == 1.0 {
            self.lad(n)
        } else {
            self.irls(n, start)
        }?;
        let zero_value = grid_norm(&self.values, self.p);
        if zero_value <= sol.value {
            return Ok(Approximation {
                value: zero_value,
                argmin: TrigPoly::zero(),
                method: Method::ZeroApproximant,
                iterations: sol.iterations,
                lower_bound: sol.lower_bound,
                grid_points: self.m,
            });
        }
        Ok(sol)
    }

    fn residual(&self, t: &TrigPoly) -> Vec<f64> {
        let tv = t.sample(self.m);
        self.values.iter().zip(tv).map(|(f, t)| f - t).collect()
    }

    fn basis_row(&self, n: usize, i: usize, row: &mut [f64]) {
        row[0] = 1.0;
        for j in 1..=n {
            let t = (j * i) % self.m;
            row[j] = self.cos_table[t];
            row[n + j] = self.sin_table[t];
        }
    }

    /// Discrete Remez with multiple exchange; `None` when the exchange loses
    /// alternation, in which case the caller falls back to Lawson.
    fn remez(&self, n: usize) -> Option<Approximation> {
        let l = 2 * n + 2;
        let dim = 2 * n + 1;
        let mut reference: Vec<usize> = (0..l).map(|r| r * self.m / l).collect();
        let mut best: Option<(f64, TrigPoly, f64)> = None;
        let mut row = vec![0.0; dim];
        for it in 1..=200 {
            let mut a = DMatrix::zeros(l, l);
            let mut rhs = DVector::zeros(l);
            for (r, &i) in reference.iter().enumerate() {
                self.basis_row(n, i, &mut row);
                for (j, v) in row.iter().enumerate() {
                    a[(r, j)] = *v;
                }
                a[(r, dim)] = if r % 2 == 0 { 1.0 } else { -1.0 };
                rhs[r] = self.values[i];
            }
            let sol = a.lu().solve(&rhs)?;
            let level = sol[dim].abs();
            let t = coeffs_to_poly(sol.as_slice(), n);
            let e = self.residual(&t);
            let (imax, emax) = e.iter().enumerate().fold((0, 0.0_f64), |acc, (i, v)| {
                if v.abs() > acc.1 {
                    (i, v.abs())
                } else {
                    acc
                }
            });
            let improved = best.as_ref().map_or(true, |b| emax < b.0);
            if improved {
                best = Some((emax, t, level));
            }
            let lower = best.as_ref().map(|b| b.2.max(level)).unwrap_or(level);
            let (bv, _, _) = best.as_ref().expect("set above");
            if *bv == 0.0 || (*bv - lower) <= 1e-10 * *bv {
                let (v, t, _) = best.take().expect("set above");
                return Some(self.finish_minimax(v, t, lower, it, Method::Remez));
            }
            let next = exchange(&e, imax, emax, l)?;
            if next == reference {
                let (v, t, _) = best.take().expect("set above");
                return ((v - lower) <= 1e-6 * v)
                    .then(|| self.finish_minimax(v, t, lower, it, Method::Remez));
            }
            reference = next;
        }
        let (v, t, lvl) = best?;
        ((v - lvl) <= 1e-6 * v).then(|| self.finish_minimax(v, t, lvl, 200, Method::Remez))
    }

    fn finish_minimax(
        &self,
        value: f64,
        t: TrigPoly,
        lower: f64,
        it: usize,
        method: Method,
    ) -> Approximation {
        Approximation {
            value,
            argmin: t,
            method,
            iterations: it,
            lower_bound: Some(lower.min(value)),
            grid_points: self.m,
        }
    }

    /// Lawson's reweighting for the discrete minimax problem.
    fn lawson(&self, n: usize) -> Result<Approximation> {
        let mut w = vec![1.0 / self.m as f64; self.m];
        let mut best: Option<(f64, TrigPoly)> = None;
        let mut lower = 0.0_f64;
        const CAP: usize = 5000;
        for it in 1..=CAP {
            let c = self.weighted_ls(n, &w)?;
            let t = coeffs_to_poly(&c, n);
            let e = self.residual(&t);
            let weighted: f64 = w.iter().zip(&e).map(|(w, e)| w * e * e).sum();
            lower = lower.max(weighted.sqrt());
            let emax = e.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if best.as_ref().map_or(true, |b| emax < b.0) {
                best = Some((emax, t));
            }
            let bv = best.as_ref().expect("set above").0;
            if bv == 0.0 || bv - lower <= 1e-6 * bv {
                let (v, t) = best.take().expect("set above");
                return Ok(self.finish_minimax(v, t, lower, it, Method::Lawson));
            }
            let mut total = 0.0;
            for (wi, ei) in w.iter_mut().zip(&e) {
                *wi *= ei.abs();
                total += *wi;
            }
            if total == 0.0 {
                break;
            }
            for wi in &mut w {
                *wi /= total;
            }
        }
        let (v, t) = best.expect("at least one iteration");
        if v - lower <= 1e-4 * v {
            return Ok(self.finish_minimax(v, t, lower, CAP, Method::Lawson));
        }
        Err(Error::SolverFailed {
            method: "lawson",
            iterations: CAP,
            last_value: v,
        })
    }

    /// Gram matrix G_{jk} = Σ_i w_i φ_j(x_i)φ_k(x_i) of the basis
    /// 1, cos 1..n, sin 1..n, assembled from the discrete Fourier transform
    /// of the weights: with C(q) = Σ w_i cos qx_i and S(q) = Σ w_i sin qx_i,
    /// ⟨cos j, cos k⟩ = ½(C(j−k) + C(j+k)), ⟨sin j, sin k⟩ = ½(C(j−k) − C(j+k)),
    /// ⟨cos j, sin k⟩ = ½(S(k+j) + S(k−j)).
    fn gram(&self, n: usize, w: &[f64]) -> DMatrix<f64> {
        let m = self.m;
        let mut wf: Vec<Complex<f64>> = w.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft_forward(&mut wf);
        let c = |q: isize| wf[q.unsigned_abs() % m].re;
        let s = |q: isize| {
            let v = -wf[q.unsigned_abs() % m].im;
            if q < 0 {
                -v
            } else {
                v
            }
        };
        let dim = 2 * n + 1;
        let mut g = DMatrix::zeros(dim, dim);
        g[(0, 0)] = c(0);
        for j in 1..=n {
            let ji = j as isize;
            g[(0, j)] = c(ji);
            g[(j, 0)] = c(ji);
            g[(0, n + j)] = s(ji);
            g[(n + j, 0)] = s(ji);
            for k in 1..=n {
                let ki = k as isize;
                g[(j, k)] = 0.5 * (c(ji - ki) + c(ji + ki));
                g[(n + j, n + k)] = 0.5 * (c(ji - ki) - c(ji + ki));
                let cs = 0.5 * (s(ki + ji) + s(ki - ji));
                g[(j, n + k)] = cs;
                g[(n + k, j)] = cs;
            }
        }
        g
    }

    /// Σ_i v_i φ_j(x_i) for every basis function.
    fn adjoint(&self, n: usize, v: &[f64]) -> DVector<f64> {
        let mut vf: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
        fft_forward(&mut vf);
        let mut r = DVector::zeros(2 * n + 1);
        r[0] = vf[0].re;
        for j in 1..=n {
            r[j] = vf[j].re;
            r[n + j] = -vf[j].im;
        }
        r
    }

    /// Σ_j c_j φ_j(x_i) on the grid.
    fn synthesize(&self, n: usize, c: &[f64]) -> Vec<f64> {
        coeffs_to_poly(c, n).sample(self.m)
    }

    /// Weighted least squares over T_n.
    fn weighted_ls(&self, n: usize, w: &[f64]) -> Result<Vec<f64>> {
        let wf: Vec<f64> = w.iter().zip(&self.values).map(|(w, f)| w * f).collect();
        let x = solve_spd(self.gram(n, w), &self.adjoint(n, &wf))?;
        Ok(x.as_slice().to_vec())
    }

    /// Discrete least absolute deviations by a primal-dual interior-point
    /// method on the dual program max Σ f_i d_i, Σ d_i φ_j(x_i) = 0,
    /// |d_i| ≤ 1, written with a = (d + 1)/2 ∈ [0, 1]. The coefficients are
    /// the negated equality multipliers; any feasible a certifies the lower
    /// bound Σ f_i(2a_i − 1).
    fn lad(&self, n: usize) -> Result<Approximation> {
        const CAP: usize = 200;
        const TO_BOUNDARY: f64 = 0.99995;
        let m = self.m;
        let dim = 2 * n + 1;
        let cvec: Vec<f64> = self.values.iter().map(|v| -v).collect();
        let mut a = vec![0.5; m];
        let mut s = vec![0.5; m];
        let ones = vec![1.0; m];
        let mut pi = solve_spd(self.gram(n, &ones), &self.adjoint(n, &cvec))?;
        let r: Vec<f64> = cvec
            .iter()
            .zip(self.synthesize(n, pi.as_slice()))
            .map(|(c, t)| c - t)
            .collect();
        let kick = 0.1 * r.iter().map(|v| v.abs()).sum::<f64>() / m as f64 + 1e-300;
        let mut z: Vec<f64> = r.iter().map(|v| v.max(0.0) + kick).collect();
        let mut w: Vec<f64> = r.iter().map(|v| (-v).max(0.0) + kick).collect();
        let weight = 2.0 * PI / m as f64;
        let mut best: Option<(f64, Vec<f64>, f64)> = None;
        for it in 1..=CAP {
            let fit = self.synthesize(n, pi.as_slice());
            let resid: Vec<f64> = self.values.iter().zip(&fit).map(|(f, t)| f + t).collect();
            let upper = weight * resid.iter().map(|v| v.abs()).sum::<f64>();
            let lower = weight
                * self
                    .values
                    .iter()
                    .zip(&a)
                    .map(|(f, a)| f * (2.0 * a - 1.0))
                    .sum::<f64>();
            let coeffs: Vec<f64> = pi.iter().map(|v| -v).collect();
            if best.as_ref().map_or(true, |b| upper < b.0) {
                best = Some((upper, coeffs, lower));
            }
            let b = best.as_mut().expect("set above");
            b.2 = b.2.max(lower);
            if b.0 - b.2 <= 1e-10 * b.0.abs().max(1e-300) {
                let (v, c, lb) = best.take().expect("set above");
                return Ok(self.finish_lad(v, &c, lb, it, n));
            }
            let rc: Vec<f64> = (0..m).map(|i| cvec[i] - fit[i] - z[i] + w[i]).collect();
            let q: Vec<f64> = (0..m).map(|i| 1.0 / (z[i] / a[i] + w[i] / s[i])).collect();
            let g = self.gram(n, &q);
            let lu = g.lu();
            let direction = |mu: f64| -> Option<(Vec<f64>, Vec<f64>, Vec<f64>, DVector<f64>)> {
                let rt: Vec<f64> = (0..m)
                    .map(|i| rc[i] - (mu / a[i] - z[i]) + (mu / s[i] - w[i]))
                    .collect();
                let qr: Vec<f64> = (0..m).map(|i| q[i] * rt[i]).collect();
                let dpi = lu.solve(&self.adjoint(n, &qr))?;
                let adp = self.synthesize(n, dpi.as_slice());
                let da: Vec<f64> = (0..m).map(|i| q[i] * (adp[i] - rt[i])).collect();
                let dz: Vec<f64> = (0..m)
                    .map(|i| (mu - a[i] * z[i] - z[i] * da[i]) / a[i])
                    .collect();
                let dw: Vec<f64> = (0..m)
                    .map(|i| (mu - s[i] * w[i] + w[i] * da[i]) / s[i])
                    .collect();
                Some((da, dz, dw, dpi))
            };
            let steps = |da: &[f64], dz: &[f64], dw: &[f64]| -> (f64, f64) {
                let mut ap = 1.0_f64;
                let mut ad = 1.0_f64;
                for i in 0..m {
                    if da[i] < 0.0 {
                        ap = ap.min(-a[i] / da[i]);
                    } else if da[i] > 0.0 {
                        ap = ap.min(s[i] / da[i]);
                    }
                    if dz[i] < 0.0 {
                        ad = ad.min(-z[i] / dz[i]);
                    }
                    if dw[i] < 0.0 {
                        ad = ad.min(-w[i] / dw[i]);
                    }
                }
                (ap, ad)
            };
            let gap: f64 = (0..m).map(|i| a[i] * z[i] + s[i] * w[i]).sum();
            let Some((da0, dz0, dw0, _)) = direction(0.0) else {
                break;
            };
            let (ap0, ad0) = steps(&da0, &dz0, &dw0);
            let gap_aff: f64 = (0..m)
                .map(|i| {
                    (a[i] + ap0 * da0[i]) * (z[i] + ad0 * dz0[i])
                        + (s[i] - ap0 * da0[i]) * (w[i] + ad0 * dw0[i])
                })
                .sum();
            let sigma = (gap_aff / gap).clamp(0.0, 1.0).powi(3);
            let mu = sigma * gap / (2 * m) as f64;
            let Some((da, dz, dw, dpi)) = direction(mu) else {
                break;
            };
            let (ap, ad) = steps(&da, &dz, &dw);
            let (ap, ad) = ((TO_BOUNDARY * ap).min(1.0), (TO_BOUNDARY * ad).min(1.0));
            for i in 0..m {
                a[i] += ap * da[i];
                s[i] = 1.0 - a[i];
                z[i] += ad * dz[i];
                w[i] += ad * dw[i];
            }
            if s.iter().any(|v| *v <= 0.0) || a.iter().any(|v| *v <= 0.0) {
                break;
            }
            pi += dpi * ad;
            debug_assert_eq!(pi.len(), dim);
        }
        match best {
            Some((v, c, lb)) if v - lb <= 1e-6 * v => Ok(self.finish_lad(v, &c, lb, CAP, n)),
            Some((v, _, _)) => Err(Error::SolverFailed {
                method: "least absolute deviations",
                iterations: CAP,
                last_value: v,
            }),
            None => Err(Error::SolverFailed {
                method: "least absolute deviations",
                iterations: 0,
                last_value: f64::NAN,
            }),
        }
    }

    fn finish_lad(
        &self,
        value: f64,
        coeffs: &[f64],
        lower: f64,
        it: usize,
        n: usize,
    ) -> Approximation {
        let t = coeffs_to_poly(coeffs, n);
        debug_assert!(value.is_finite());
        let value = grid_norm(&self.residual(&t), 1.0);
        Approximation {
            value,
            argmin: t,
            method: Method::InteriorPoint,
            iterations: it,
            lower_bound: Some(lower.min(value)),
            grid_points: self.m,
        }
    }

    /// IRLS for 1 < p < ∞, p ≠ 2. For p < 2 the weights (e² + η²)^{(p−2)/2}
    /// minimize a smoothed objective whose smoothing η shrinks with the
    /// residual; for p > 2 the step is the Newton step 1/(p − 1) of the
    /// reweighted solution. Either way steps are halved until the objective
    /// decreases.
    fn irls(&self, n: usize, start: Option<&TrigPoly>) -> Result<Approximation> {
        const CAP: usize = 500;
        const DAMPING: f64 = 0.5;
        let p = self.p;
        let dim = 2 * n + 1;
        let mut coeffs = vec![0.0; dim];
        if let Some(t) = start {
            coeffs[0] = t.a0_half();
            for k in 1..=n.min(t.len()) {
                coeffs[k] = t.a(k);
                coeffs[n + k] = t.b(k);
            }
        }
        let objective = |e: &[f64]| e.iter().map(|v| v.abs().powf(p)).sum::<f64>();
        let mut e = self.residual(&coeffs_to_poly(&coeffs, n));
        let mean_abs = |e: &[f64]| e.iter().map(|v| v.abs()).sum::<f64>() / e.len() as f64;
        let mut kappa = if p < 2.0 { 0.1 } else { 0.0 };
        let kappa_min = 1e-10;
        let smoothed = |e: &[f64], eta: f64| -> f64 {
            if p < 2.0 {
                e.iter().map(|v| (v * v + eta * eta).powf(0.5 * p)).sum()
            } else {
                objective(e)
            }
        };
        let mut eta = kappa * mean_abs(&e);
        let mut best = (objective(&e), coeffs.clone());
        let mut quiet = 0usize;
        for it in 1..=CAP {
            let w: Vec<f64> = if p < 2.0 {
                e.iter()
                    .map(|v| (v * v + eta * eta).powf(0.5 * (p - 2.0)))
                    .collect()
            } else {
                let emax = e.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                e.iter()
                    .map(|v| v.abs().max(1e-12 * emax).powf(p - 2.0))
                    .collect()
            };
            let wmax = w.iter().cloned().fold(0.0_f64, f64::max);
            if !(wmax > 0.0) || !wmax.is_finite() {
                break;
            }
            let w: Vec<f64> = w.iter().map(|v| v / wmax).collect();
            let target = self.weighted_ls(n, &w)?;
            let current = smoothed(&e, eta);
            let mut step = if p > 2.0 { 1.0 / (p - 1.0) } else { 1.0 };
            let mut accepted = None;
            for _ in 0..40 {
                let trial: Vec<f64> = coeffs
                    .iter()
                    .zip(&target)
                    .map(|(c, t)| c + step * (t - c))
                    .collect();
                let et = self.residual(&coeffs_to_poly(&trial, n));
                let val = smoothed(&et, eta);
                if val <= current {
                    accepted = Some((trial, et, val));
                    break;
                }
                step *= DAMPING;
            }
            let decrease = match accepted {
                Some((trial, et, val)) => {
                    coeffs = trial;
                    e = et;
                    (current - val) / current.max(f64::MIN_POSITIVE)
                }
                None => 0.0,
            };
            let obj = objective(&e);
            if obj < best.0 {
                best = (obj, coeffs.clone());
            }
            if decrease < 1e-12 {
                if p < 2.0 && kappa > kappa_min {
                    kappa *= 0.1;
                    eta = kappa * mean_abs(&e);
                    quiet = 0;
                    continue;
                }
                quiet += 1;
                if quiet >= 3 || decrease == 0.0 {
                    let t = coeffs_to_poly(&best.1, n);
                    let value = grid_norm(&self.residual(&t), p);
                    return Ok(Approximation {
                        value,
                        argmin: t,
                        method: Method::Irls,
                        iterations: it,
                        lower_bound: None,
                        grid_points: self.m,
                    });
                }
            } else {
                quiet = 0;
                if p < 2.0 && decrease < 1e-6 && kappa > kappa_min {
                    kappa *= 0.1;
                    eta = kappa * mean_abs(&e);
                }
            }
        }
        Err(Error::SolverFailed {
            method: "irls",
            iterations: CAP,
            last_value: (best.0 * 2.0 * PI / self.m as f64).powf(1.0 / p),
        })
    }
}

fn solve_spd(g: DMatrix<f64>, r: &DVector<f64>) -> Result<DVector<f64>> {
    let solved = match g.clone().cholesky() {
        Some(ch) => Some(ch.solve(r)),
        None => g.lu().solve(r),
    };
    match solved {
        Some(x) if x.iter().all(|v| v.is_finite()) => Ok(x),
        _ => Err(Error::SolverFailed {
            method: "weighted least squares",
            iterations: 0,
            last_value: f64::NAN,
        }),
    }
}

fn coeffs_to_poly(c: &[f64], n: usize) -> TrigPoly {
    TrigPoly::new(c[0], c[1..=n].to_vec(), c[n + 1..2 * n + 1].to_vec()).expect("equal lengths")
}

/// Reference for the next Remez step: one extremum per cyclic sign run of
/// the error, trimmed to `l` alternating points by repeatedly dropping the
/// smallest extremum together with its smaller neighbour. The global
/// maximum is always kept.
fn exchange(e: &[f64], imax: usize, emax: f64, l: usize) -> Option<Vec<usize>> {
    let m = e.len();
    let tiny = 1e-14 * emax;
    let mut runs: Vec<(usize, f64)> = Vec::new();
    let mut sign = 0i8;
    for off in 0..m {
        let i = (imax + off) % m;
        let v = e[i];
        if v.abs() <= tiny {
            continue;
        }
        let s = if v > 0.0 { 1 } else { -1 };
        if s != sign {
            runs.push((i, v.abs()));
            sign = s;
        } else if let Some(last) = runs.last_mut() {
            if v.abs() > last.1 {
                *last = (i, v.abs());
            }
        }
    }
    if runs.len() > 1 && runs.len() % 2 == 1 {
        // The last run wraps around into the first one.
        let last = runs.pop().expect("non-empty");
        if last.1 > runs[0].1 {
            runs[0] = last;
        }
    }
    if runs.len() < l {
        return None;
    }
    while runs.len() > l {
        let k = runs.len();
        let (small, _) = runs
            .iter()
            .enumerate()
            .skip(1)
            .fold(
                (1, f64::INFINITY),
                |acc, (i, r)| if r.1 < acc.1 { (i, r.1) } else { acc },
            );
        let left = (small + k - 1) % k;
        let right = (small + 1) % k;
        let partner = if left == 0 {
            right
        } else if right == 0 || runs[left].1 <= runs[right].1 {
            left
        } else {
            right
        };
        let (a, b) = if small > partner {
            (small, partner)
        } else {
            (partner, small)
        };
        runs.remove(a);
        runs.remove(b);
    }
    let mut idx: Vec<usize> = runs.into_iter().map(|r| r.0).collect();
    idx.sort_unstable();
    Some(idx)
}

/// |Σ_{ν>n} b_ν/ν|, a lower bound for E_n(f)_1 up to a constant.
pub fn l1_lower_bound(f: &TrigPoly, n: usize) -> f64 {
    f.harmonics()
        .filter(|(k, _, _)| *k > n)
        .map(|(k, _, b)| b / k as f64)
        .sum::<f64>()
        .abs()
}

/// Σ_{ξ≥n}(a_{2^ξ} + b_{2^ξ}) for a series supported on frequencies 2^ξ
/// with non-negative coefficients; comparable to E_{2ⁿ−1}(f)_∞.
pub fn lacunary_tail(f: &TrigPoly, n: usize) -> Result<f64> {
    let mut total = 0.0;
    for (k, a, b) in f.harmonics() {
        if a == 0.0 && b == 0.0 {
            continue;
        }
        if !k.is_power_of_two() {
            return Err(Error::NotLacunary(format!(
                "frequency {k} is not a power of two"
            )));
        }
        if a < 0.0 || b < 0.0 {
            return Err(Error::NotLacunary(format!(
                "negative coefficient at frequency {k}"
            )));
        }
        if k.trailing_zeros() as usize >= n {
            total += a + b;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sample_poly() -> TrigPoly {
        TrigPoly::from_terms([
            (1, 1.0, 0.4),
            (2, -0.6, 0.9),
            (3, 0.2, 0.0),
            (5, 0.3, -0.2),
            (8, 0.1, 0.15),
        ])
    }

    #[test]
    fn l2_examples() {
        let f = TrigPoly::from_terms([(1, 1.0, 0.0), (3, 0.5, 0.0)]);
        assert_relative_eq!(best_approx_l2(&f, 1), PI.sqrt() / 2.0, max_relative = 1e-15);
        assert_eq!(best_approx_l2(&f, 3), 0.0);
        assert_relative_eq!(
            best_approx_l2(&TrigPoly::sin(2, 1.0), 0),
            PI.sqrt(),
            max_relative = 1e-15
        );
        let a = best_approx(&f, 1, 2.0).unwrap();
        assert_eq!(a.argmin.trimmed(), TrigPoly::cos(1, 1.0));
    }

    #[test]
    fn minimax_examples() {
        let a = best_approx(&TrigPoly::cos(2, 1.0), 1, f64::INFINITY).unwrap();
        assert_relative_eq!(a.value, 1.0, max_relative = 1e-10);
        for &p in &[1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            assert_eq!(best_approx(&sample_poly(), 8, p).unwrap().value, 0.0);
        }
    }

    #[test]
    fn constant_approximant_oracles() {
        // n = 0: the grid optimum is the midrange for p = ∞ and the median
        // for p = 1.
        let f = sample_poly();
        let m = approximation_grid(f.degree(), 0);
        let vals = f.sample(m);
        let (lo, hi) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
                (l.min(*v), h.max(*v))
            });
        let sup = best_approx(&f, 0, f64::INFINITY).unwrap();
        assert_relative_eq!(sup.value, 0.5 * (hi - lo), max_relative = 1e-10);
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        let med = 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
        let want = grid_norm(&vals.iter().map(|v| v - med).collect::<Vec<_>>(), 1.0);
        let l1 = best_approx(&f, 0, 1.0).unwrap();
        assert_relative_eq!(l1.value, want, max_relative = 1e-6);
    }

    #[test]
    fn uniform_best_constant_is_the_mid_range() {
        let mut f = TrigPoly::zero();
        for nu in 1..=6 {
            f.add_term(1 << nu, 2f64.powf(-1.5 * nu as f64), 0.0);
        }
        let s = BestApproximator::new(&f, f64::INFINITY, f.degree()).unwrap();
        let a = s.solve(0, None).unwrap();
        let v = f.sample(s.grid_points());
        let (hi, lo) = v
            .iter()
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(h, l), &x| {
                (h.max(x), l.min(x))
            });
        assert_relative_eq!(a.value, 0.5 * (hi - lo), max_relative = 1e-14);
        assert_relative_eq!(a.argmin.a0_half(), 0.5 * (hi + lo), epsilon = 1e-14);
    }

    #[test]
    fn remez_certificate_and_lawson_agree() {
        let f = sample_poly();
        let solver = BestApproximator::new(&f, f64::INFINITY, 4).unwrap();
        for n in 1..5 {
            let r = solver.remez(n).expect("remez converges");
            let l = solver.lawson(n).unwrap();
            let lb = r.lower_bound.unwrap();
            assert!(lb <= r.value && r.value - lb <= 1e-9 * r.value);
            assert_relative_eq!(r.value, l.value, max_relative = 1e-4);
            let e = solver.residual(&r.argmin);
            assert_relative_eq!(grid_norm(&e, f64::INFINITY), r.value, max_relative = 1e-12);
        }
    }

    #[test]
    fn gram_matrix_matches_direct_assembly() {
        let f = sample_poly();
        let solver = BestApproximator::new(&f, 1.0, 3).unwrap();
        let n = 3;
        let w: Vec<f64> = (0..solver.m)
            .map(|i| 1.0 + (i as f64 * 0.1).sin().powi(2))
            .collect();
        let fast = solver.weighted_ls(n, &w).unwrap();
        let dim = 2 * n + 1;
        let mut g = DMatrix::zeros(dim, dim);
        let mut r = DVector::zeros(dim);
        let mut row = vec![0.0; dim];
        for i in 0..solver.m {
            solver.basis_row(n, i, &mut row);
            for j in 0..dim {
                r[j] += w[i] * solver.values[i] * row[j];
                for k in 0..dim {
                    g[(j, k)] += w[i] * row[j] * row[k];
                }
            }
        }
        let direct = g.lu().solve(&r).unwrap();
        for j in 0..dim {
            assert_relative_eq!(fast[j], direct[j], epsilon = 1e-10);
        }
    }

    #[test]
    fn solvers_are_locally_optimal() {
        let f = sample_poly();
        for &p in &[1.0, 1.5, 3.0, 4.0] {
            let solver = BestApproximator::new(&f, p, 3).unwrap();
            let a = solver.solve(3, None).unwrap();
            let base = a.value;
            for k in 0..=3usize {
                for &(da, db) in &[(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
                    let mut t = a.argmin.clone();
                    if k == 0 {
                        t = &t + &TrigPoly::constant(da + db);
                    } else {
                        t.add_term(k, da, db);
                    }
                    let v = grid_norm(&solver.residual(&t), p);
                    assert!(v >= base * (1.0 - 1e-7), "p={p} k={k}: {v} < {base}");
                }
            }
        }
    }

    #[test]
    fn sequence_is_monotone_and_bounded() {
        let f = sample_poly();
        for &p in &[1.0, 3.0, f64::INFINITY] {
            let solver = BestApproximator::new(&f, p, 9).unwrap();
            let seq = solver.sequence(9).unwrap();
            let norm = grid_norm(&f.sample(solver.grid_points()), p);
            assert!(seq[0].value <= norm);
            for w in seq.windows(2) {
                assert!(w[1].value <= w[0].value);
            }
            assert_eq!(seq[8].value, 0.0);
        }
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(l1_lower_bound(&TrigPoly::sin(1, 1.0), 0), 1.0);
        assert_eq!(l1_lower_bound(&TrigPoly::cos(3, 2.0), 0), 0.0);
        assert_eq!(
            l1_lower_bound(&TrigPoly::from_terms([(1, 0.0, 1.0), (2, 0.0, 1.0)]), 1),
            0.5
        );
    }

    #[test]
    fn lacunary_examples() {
        let f = TrigPoly::from_terms([(2, 1.0, 0.0), (4, 0.5, 0.0), (8, 0.25, 0.0)]);
        assert_eq!(lacunary_tail(&f, 1).unwrap(), 1.75);
        assert_eq!(lacunary_tail(&f, 5).unwrap(), 0.0);
        assert_eq!(lacunary_tail(&TrigPoly::cos(16, 0.3), 4).unwrap(), 0.3);
        assert!(matches!(
            lacunary_tail(&TrigPoly::cos(3, 1.0), 0),
            Err(Error::NotLacunary(_))
        ));
        assert!(matches!(
            lacunary_tail(&TrigPoly::cos(4, -1.0), 0),
            Err(Error::NotLacunary(_))
        ));
    }

    #[test]
    fn lacunary_values_are_stable_under_grid_doubling() {
        let f = TrigPoly::from_terms((1..=6).map(|k: i32| (1usize << k, 0.5f64.powi(k), 0.0)));
        for p in [1.0, 3.0, f64::INFINITY] {
            for n in [1, 5, 20] {
                let m = approximation_grid(f.degree(), n);
                let coarse = BestApproximator::with_grid(&f, p, m)
                    .unwrap()
                    .solve(n, None)
                    .unwrap()
                    .value;
                let fine = BestApproximator::with_grid(&f, p, 2 * m)
                    .unwrap()
                    .solve(n, None)
                    .unwrap()
                    .value;
                let finer = BestApproximator::with_grid(&f, p, 4 * m)
                    .unwrap()
                    .solve(n, None)
                    .unwrap()
                    .value;
                assert!(
                    (coarse - finer).abs() <= 5e-3 * finer,
                    "p={p} n={n}: {coarse} vs {finer}"
                );
                assert!(
                    (fine - finer).abs() <= 1e-3 * finer,
                    "p={p} n={n}: {fine} vs {finer}"
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn best_approx_bounded_by_zero_approximant(a in prop::collection::vec(-1.0..1.0f64, 6), b in prop::collection::vec(-1.0..1.0f64, 6), n in 0usize..5, pi in 0usize..4) {
            let p = [1.0, 1.5, 3.0, f64::INFINITY][pi];
            let f = TrigPoly::new(0.2, a, b).unwrap();
            let solver = BestApproximator::new(&f, p, n).unwrap();
            let r = solver.solve(n, None).unwrap();
            prop_assert!(r.value <= grid_norm(&f.sample(solver.grid_points()), p));
            let achieved = grid_norm(&solver.residual(&r.argmin), p);
            prop_assert!((achieved - r.value).abs() <= 1e-10 * r.value.max(1e-300));
        }
    }
}
