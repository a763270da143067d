//! Multiplier operators on trigonometric polynomials: partial sums,
//! de la Vallée-Poussin means, Fejér kernels, the conjugate function,
//! (λ, β)-transforms and Weyl derivatives, and the transform bound μ(M, N).
//!
//! The conjugate follows the Zygmund convention
//! a cos νx + b sin νx ↦ a sin νx − b cos νx, so the (λ ≡ 1, β = 1)
//! transform equals −f̃.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sequences::{classify_slice, SequenceDescriptor};
use crate::trigpoly::TrigPoly;

/// λ = {λ_ν} and the phase β of σ(f, λ, β).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub lambda: SequenceDescriptor,
    pub beta: f64,
}

impl MultiplierSpec {
    pub fn new(lambda: SequenceDescriptor, beta: f64) -> Self {
        Self { lambda, beta }
    }

    /// λ_ν = ν^r with β = r.
    pub fn weyl(r: f64) -> Self {
        Self::new(SequenceDescriptor::power(r), r)
    }
}

/// (cos(πβ/2), sin(πβ/2)), exact when β is an integer or half-integer
/// multiple of the quarter turn.
pub fn half_pi_phase(beta: f64) -> (f64, f64) {
    // Turns measured in units of π: t ∈ [0, 2).
    let t = (0.5 * beta).rem_euclid(2.0);
    let quarter = (2.0 * t).round();
    let rem = t - 0.5 * quarter;
    let (s, c) = if rem == 0.0 {
        (0.0, 1.0)
    } else {
        (std::f64::consts::PI * rem).sin_cos()
    };
    match (quarter as i64).rem_euclid(4) {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

/// S_n(f): harmonics 0..=n.
pub fn partial_sum(f: &TrigPoly, n: usize) -> TrigPoly {
    f.fourier_block(0, n)
}

/// V_n(f) = (1/n) Σ_{ν=n}^{2n−1} S_ν(f).
pub fn vallee_poussin(f: &TrigPoly, n: usize) -> Result<TrigPoly> {
    if n == 0 {
        return Err(invalid("de la Vallée-Poussin mean needs n ≥ 1"));
    }
    let nf = n as f64;
    Ok(f.map_harmonics(f.a0_half(), |m, a, b| {
        let w = vp_weight(m, n, nf);
        (w * a, w * b)
    }))
}

fn vp_weight(m: usize, n: usize, nf: f64) -> f64 {
    if m <= n {
        1.0
    } else if m < 2 * n {
        1.0 - (m - n) as f64 / nf
    } else {
        0.0
    }
}

/// K_n(x) = 1/2 + Σ_{m=1}^n (1 − m/(n+1)) cos mx.
pub fn fejer_kernel(n: usize) -> TrigPoly {
    let scale = (n + 1) as f64;
    let a: Vec<f64> = (1..=n).map(|m| 1.0 - m as f64 / scale).collect();
    let b = vec![0.0; n];
    TrigPoly::new(0.5, a, b).expect("equal lengths")
}

/// σ(f, λ, β) = Σ_{ν≥1} λ_ν [a_ν cos(νx + πβ/2) + b_ν sin(νx + πβ/2)].
pub fn lambda_beta_transform(f: &TrigPoly, spec: &MultiplierSpec) -> Result<TrigPoly> {
    let (c, s) = half_pi_phase(spec.beta);
    let lambdas = lambda_values(&spec.lambda, f)?;
    Ok(f.map_harmonics(0.0, |k, a, b| {
        let l = lambdas[k];
        (l * (a * c + b * s), l * (b * c - a * s))
    }))
}

/// λ_ν for the harmonics of `f` that carry a non-zero coefficient.
fn lambda_values(d: &SequenceDescriptor, f: &TrigPoly) -> Result<Vec<f64>> {
    let mut out = vec![0.0; f.len() + 1];
    for (k, a, b) in f.harmonics() {
        if a != 0.0 || b != 0.0 {
            out[k] = d.eval(k)?;
        }
    }
    Ok(out)
}

/// f̃ ~ Σ (a_ν sin νx − b_ν cos νx).
pub fn conjugate(f: &TrigPoly) -> TrigPoly {
    f.map_harmonics(0.0, |_, a, b| (-b, a))
}

/// f^{(r)} with λ_ν = ν^r and β = r.
pub fn weyl_derivative(f: &TrigPoly, r: f64) -> Result<TrigPoly> {
    if !(r > 0.0) {
        return Err(invalid("derivative order must be positive"));
    }
    lambda_beta_transform(f, &MultiplierSpec::weyl(r))
}

/// V_n(λ, f) = σ(V_n(f), λ, β).
pub fn lambda_vp_mean(f: &TrigPoly, spec: &MultiplierSpec, n: usize) -> Result<TrigPoly> {
    lambda_beta_transform(&vallee_poussin(f, n)?, spec)
}

/// Which of the three bound formulas applies to λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierBranch {
    IncreasingConvex,
    IncreasingConcave,
    DecreasingConvex,
}

/// Classifies λ on 1..=hi into a branch of the μ bound.
pub fn multiplier_branch(lambda: &[f64], hi: usize) -> Result<MultiplierBranch> {
    let class = classify_slice(lambda, 1, hi);
    if class.is_increasing() && class.is_convex() {
        Ok(MultiplierBranch::IncreasingConvex)
    } else if class.is_increasing() && class.is_concave() {
        Ok(MultiplierBranch::IncreasingConcave)
    } else if class.is_decreasing() && class.is_convex() {
        Ok(MultiplierBranch::DecreasingConvex)
    } else {
        Err(Error::NoMultiplierBranch { lo: 1, hi })
    }
}

/// μ(M, N) with ‖T_M(λ) − T_N(λ)‖_p ≤ μ(M, N)‖T_M − T_N‖_p for p = 1, ∞:
///
/// * increasing convex: 2M(λ_M − λ_{M−1}) + λ_{N+1} − (N+1)(λ_{N+2} − λ_{N+1});
/// * increasing concave: 2λ_M + (N+1)(λ_{N+2} − λ_{N+1}) − λ_{N+1};
/// * decreasing convex: (N+1)(λ_{N+1} − λ_{N+2}) + λ_{N+1}.
///
/// When M = N + 1 the difference is a single harmonic whose transform is
/// exactly λ_M times it, so the value is never below λ_M there.
pub fn multiplier_bound_mu(lambda: &SequenceDescriptor, m: usize, n: usize) -> Result<f64> {
    if m <= n {
        return Err(invalid("μ(M, N) needs M > N"));
    }
    let hi = (m + 1).max(n + 2).max(3);
    let l = lambda.values(hi)?;
    let branch = multiplier_branch(&l, hi)?;
    if m == n + 1 && m == 1 {
        return Ok(l[1]);
    }
    let (mf, n1) = (m as f64, (n + 1) as f64);
    let value = match branch {
        MultiplierBranch::IncreasingConvex => {
            2.0 * mf * (l[m] - l[m - 1]) + l[n + 1] - n1 * (l[n + 2] - l[n + 1])
        }
        MultiplierBranch::IncreasingConcave => 2.0 * l[m] + n1 * (l[n + 2] - l[n + 1]) - l[n + 1],
        MultiplierBranch::DecreasingConvex => n1 * (l[n + 1] - l[n + 2]) + l[n + 1],
    };
    if m == n + 1 {
        Ok(value.max(l[m]))
    } else {
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(f: &TrigPoly, g: &TrigPoly, tol: f64) -> bool {
        let d = (f - g).trimmed();
        d.a0_half().abs() <= tol
            && d.harmonics()
                .all(|(_, a, b)| a.abs() <= tol && b.abs() <= tol)
    }

    #[test]
    fn phase_is_exact_on_quarter_turns() {
        assert_eq!(half_pi_phase(0.0), (1.0, 0.0));
        assert_eq!(half_pi_phase(1.0), (0.0, 1.0));
        assert_eq!(half_pi_phase(2.0), (-1.0, 0.0));
        assert_eq!(half_pi_phase(3.0), (0.0, -1.0));
        assert_eq!(half_pi_phase(-1.0), (0.0, -1.0));
        assert_eq!(half_pi_phase(4.0), (1.0, 0.0));
        let (c, s) = half_pi_phase(0.5);
        assert_relative_eq!(c, FRAC_1_SQRT_2, epsilon = 1e-16);
        assert_relative_eq!(s, FRAC_1_SQRT_2, epsilon = 1e-16);
        for &beta in &[0.3, 1.7, -2.4, 7.9] {
            let (c, s) = half_pi_phase(beta);
            let x = std::f64::consts::FRAC_PI_2 * beta;
            assert_relative_eq!(c, x.cos(), epsilon = 1e-14);
            assert_relative_eq!(s, x.sin(), epsilon = 1e-14);
        }
    }

    #[test]
    fn partial_sums_and_means() {
        let f = TrigPoly::from_terms([(1, 1.0, 0.0), (2, 1.0, 0.0)]);
        assert_eq!(partial_sum(&f, 1).trimmed(), TrigPoly::cos(1, 1.0));
        assert!(partial_sum(&TrigPoly::sin(5, 1.0), 4).is_zero());
        assert_eq!(partial_sum(&f, 9), f);
        assert_eq!(
            vallee_poussin(&TrigPoly::cos(3, 1.0), 2).unwrap().trimmed(),
            TrigPoly::cos(3, 0.5)
        );
        assert_eq!(
            vallee_poussin(&TrigPoly::cos(1, 1.0), 2).unwrap(),
            TrigPoly::cos(1, 1.0)
        );
        assert!(vallee_poussin(&TrigPoly::cos(4, 1.0), 2).unwrap().is_zero());
        assert!(vallee_poussin(&f, 0).is_err());
    }

    #[test]
    fn vallee_poussin_matches_averaged_partial_sums() {
        let f = TrigPoly::from_coeffs(
            &[0.3, -1.0, 2.0, 0.5, 0.25, -0.7, 1.1, 0.9],
            &[1.0, 0.0, -0.5, 0.2, 0.3, 0.4, -0.1, 0.6],
        );
        for n in 1..6 {
            let mut avg = TrigPoly::zero();
            for nu in n..2 * n {
                avg = &avg + &partial_sum(&f, nu);
            }
            avg = avg.scaled(1.0 / n as f64);
            assert!(close(&avg, &vallee_poussin(&f, n).unwrap(), 1e-15));
        }
    }

    #[test]
    fn fejer_examples() {
        assert_eq!(fejer_kernel(0), TrigPoly::constant(0.5));
        assert_eq!(
            fejer_kernel(1),
            TrigPoly::new(0.5, vec![0.5], vec![0.0]).unwrap()
        );
        assert_relative_eq!(fejer_kernel(3).evaluate(0.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn fejer_matches_averaged_dirichlet_kernels() {
        let n = 6;
        let mut sum = TrigPoly::zero();
        for nu in 0..=n {
            let mut d = TrigPoly::constant(0.5);
            for m in 1..=nu {
                d.add_term(m, 1.0, 0.0);
            }
            sum = &sum + &d;
        }
        assert!(close(
            &sum.scaled(1.0 / (n + 1) as f64),
            &fejer_kernel(n),
            1e-15
        ));
    }

    #[test]
    fn transform_examples() {
        let zero_mean = TrigPoly::from_terms([(1, 1.0, 2.0), (3, -0.5, 0.25)]);
        let id = MultiplierSpec::new(SequenceDescriptor::constant(1.0), 0.0);
        assert_eq!(lambda_beta_transform(&zero_mean, &id).unwrap(), zero_mean);
        let second = MultiplierSpec::new(SequenceDescriptor::power(2.0), 2.0);
        assert_eq!(
            lambda_beta_transform(&TrigPoly::cos(1, 1.0), &second).unwrap(),
            TrigPoly::cos(1, -1.0)
        );
        let half = MultiplierSpec::weyl(0.5);
        let g = lambda_beta_transform(&TrigPoly::cos(1, 1.0), &half).unwrap();
        assert_relative_eq!(g.a(1), FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(g.b(1), -FRAC_1_SQRT_2, epsilon = 1e-15);
        // The constant term is dropped.
        assert_eq!(
            lambda_beta_transform(&TrigPoly::constant(3.0), &id)
                .unwrap()
                .a0_half(),
            0.0
        );
    }

    #[test]
    fn transform_matches_phase_shift_pointwise() {
        let f = TrigPoly::from_terms([(1, 1.0, -0.3), (2, 0.4, 0.8), (5, -1.2, 0.1)]);
        let spec = MultiplierSpec::new(SequenceDescriptor::power_log(0.7, 1.0), 1.3);
        let g = lambda_beta_transform(&f, &spec).unwrap();
        let phase = std::f64::consts::FRAC_PI_2 * spec.beta;
        for j in 0..13 {
            let x = 0.37 * j as f64;
            let want: f64 = f
                .harmonics()
                .map(|(k, a, b)| {
                    let arg = k as f64 * x + phase;
                    spec.lambda.eval(k).unwrap() * (a * arg.cos() + b * arg.sin())
                })
                .sum();
            assert_relative_eq!(g.evaluate(x), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn conjugate_and_weyl_examples() {
        assert_eq!(conjugate(&TrigPoly::cos(1, 1.0)), TrigPoly::sin(1, 1.0));
        assert_eq!(conjugate(&TrigPoly::sin(1, 1.0)), TrigPoly::cos(1, -1.0));
        assert_eq!(
            weyl_derivative(&TrigPoly::sin(1, 1.0), 1.0).unwrap(),
            TrigPoly::cos(1, 1.0)
        );
        assert_eq!(
            weyl_derivative(&TrigPoly::cos(2, 1.0), 2.0).unwrap(),
            TrigPoly::cos(2, -4.0)
        );
        assert!(weyl_derivative(&TrigPoly::cos(2, 1.0), 0.0).is_err());
        let f = TrigPoly::from_terms([(1, 1.0, 0.5), (4, -2.0, 1.0)]);
        let unit = MultiplierSpec::new(SequenceDescriptor::constant(1.0), 1.0);
        assert_eq!(lambda_beta_transform(&f, &unit).unwrap(), -&conjugate(&f));
    }

    #[test]
    fn lambda_vp_examples() {
        let id = MultiplierSpec::new(SequenceDescriptor::constant(1.0), 0.0);
        let f = TrigPoly::from_terms([(1, 1.0, 0.5), (2, -2.0, 1.0)]);
        assert_eq!(lambda_vp_mean(&f, &id, 3).unwrap(), f);
        let lin = MultiplierSpec::new(SequenceDescriptor::power(1.0), 0.0);
        assert_eq!(
            lambda_vp_mean(&TrigPoly::cos(3, 1.0), &lin, 2)
                .unwrap()
                .trimmed(),
            TrigPoly::cos(3, 1.5)
        );
        assert!(lambda_vp_mean(&TrigPoly::cos(9, 1.0), &lin, 2)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn mu_examples() {
        assert_relative_eq!(
            multiplier_bound_mu(&SequenceDescriptor::power(1.0), 5, 1).unwrap(),
            10.0
        );
        for &(m, n) in &[(2, 0), (5, 1), (9, 4)] {
            assert_relative_eq!(
                multiplier_bound_mu(&SequenceDescriptor::constant(2.5), m, n).unwrap(),
                2.5
            );
        }
        for m in 2..8 {
            assert_relative_eq!(
                multiplier_bound_mu(&SequenceDescriptor::power(-1.0), m, 1).unwrap(),
                5.0 / 6.0,
                max_relative = 1e-15
            );
        }
        let mixed = SequenceDescriptor::table(vec![1.0, 3.0, 2.0, 4.0, 1.0, 5.0]);
        assert!(matches!(
            multiplier_bound_mu(&mixed, 4, 1),
            Err(Error::NoMultiplierBranch { .. })
        ));
        assert!(multiplier_bound_mu(&SequenceDescriptor::power(1.0), 1, 1).is_err());
    }

    fn poly(max_len: usize) -> impl Strategy<Value = TrigPoly> {
        (1..max_len).prop_flat_map(|n| {
            (
                -2.0..2.0f64,
                prop::collection::vec(-2.0..2.0f64, n),
                prop::collection::vec(-2.0..2.0f64, n),
            )
                .prop_map(|(c, a, b)| TrigPoly::new(c, a, b).unwrap())
        })
    }

    proptest! {
        #[test]
        fn operators_are_linear(f in poly(12), g in poly(12), c in -3.0..3.0f64, beta in -4.0..4.0f64, r in 0.1..3.0f64, n in 1usize..8) {
            let combo = &f + &g.scaled(c);
            let spec = MultiplierSpec::new(SequenceDescriptor::power_log(r, 0.5), beta);
            let lhs = lambda_beta_transform(&combo, &spec).unwrap();
            let rhs = &lambda_beta_transform(&f, &spec).unwrap() + &lambda_beta_transform(&g, &spec).unwrap().scaled(c);
            prop_assert!(close(&lhs, &rhs, 1e-12 * (1.0 + 12f64.powf(r)) * 5.0));
            let lhs = vallee_poussin(&combo, n).unwrap();
            let rhs = &vallee_poussin(&f, n).unwrap() + &vallee_poussin(&g, n).unwrap().scaled(c);
            prop_assert!(close(&lhs, &rhs, 1e-12));
            let lhs = conjugate(&combo);
            let rhs = &conjugate(&f) + &conjugate(&g).scaled(c);
            prop_assert!(close(&lhs, &rhs, 1e-12));
            let lhs = partial_sum(&combo, n);
            let rhs = &partial_sum(&f, n) + &partial_sum(&g, n).scaled(c);
            prop_assert!(close(&lhs, &rhs, 1e-12));
        }

        #[test]
        fn weyl_semigroup(f in poly(10), r1 in 0.1..2.0f64, r2 in 0.1..2.0f64) {
            let two = weyl_derivative(&weyl_derivative(&f, r1).unwrap(), r2).unwrap();
            let one = weyl_derivative(&f, r1 + r2).unwrap();
            let scale = 10f64.powf(r1 + r2) * 2.0;
            prop_assert!(close(&two, &one, 1e-10 * scale.max(1.0)));
        }

        #[test]
        fn conjugate_twice_negates(f in poly(10)) {
            let zero_mean = f.fourier_block(1, f.len());
            prop_assert_eq!(conjugate(&conjugate(&zero_mean)), -&zero_mean);
        }
    }
}
