//! Problem specifications and closed-form asymptotic coefficients.
//!
//! For a Hankel operator whose entries (or kernel) decay like
//! `j^{-1} (log j)^{-α}` with sign-carrying and oscillating factors, the
//! extreme eigenvalues satisfy `λ_n^± ≈ a^± n^{-α}`. This module evaluates
//! `a^±` from the spec parameters.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sequences::CutoffPair;
use crate::special::ln_beta;

/// One oscillating term `2 b cos(φ j − ψ)` of a discrete sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oscillation {
    pub phi: f64,
    #[serde(default)]
    pub psi: f64,
    pub b: f64,
}

/// Additive error term `scale · j^{-1} (log j)^{-α-beta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub scale: f64,
    pub beta: f64,
}

/// Parameters of the model sequence
/// `h(j) = (b₁ + b₋₁(−1)^j + 2Σ b_ℓ cos(φ_ℓ j − ψ_ℓ)) j^{-1}(log j)^{-α}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteSymbolSpec {
    pub alpha: f64,
    #[serde(default)]
    pub b_plus1: f64,
    #[serde(default)]
    pub b_minus1: f64,
    #[serde(default)]
    pub oscillations: Vec<Oscillation>,
    #[serde(default)]
    pub perturbation: Option<Perturbation>,
}

impl DiscreteSymbolSpec {
    pub fn new(alpha: f64) -> Self {
        DiscreteSymbolSpec {
            alpha,
            b_plus1: 0.0,
            b_minus1: 0.0,
            oscillations: Vec::new(),
            perturbation: None,
        }
    }

    pub fn with_b_plus1(mut self, b: f64) -> Self {
        self.b_plus1 = b;
        self
    }

    pub fn with_b_minus1(mut self, b: f64) -> Self {
        self.b_minus1 = b;
        self
    }

    pub fn with_oscillation(mut self, phi: f64, psi: f64, b: f64) -> Self {
        self.oscillations.push(Oscillation { phi, psi, b });
        self
    }

    pub fn with_perturbation(mut self, scale: f64, beta: f64) -> Self {
        self.perturbation = Some(Perturbation { scale, beta });
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_finite("b_plus1", self.b_plus1)?;
        check_finite("b_minus1", self.b_minus1)?;
        for (i, osc) in self.oscillations.iter().enumerate() {
            if !(osc.phi > 0.0 && osc.phi < PI) {
                return Err(Error::domain(format!(
                    "oscillations[{i}].phi = {} must lie in the open interval (0, π)",
                    osc.phi
                )));
            }
            check_finite(&format!("oscillations[{i}].psi"), osc.psi)?;
            check_finite(&format!("oscillations[{i}].b"), osc.b)?;
            for (k, other) in self.oscillations.iter().enumerate().take(i) {
                if other.phi == osc.phi {
                    return Err(Error::domain(format!(
                        "oscillations[{k}].phi and oscillations[{i}].phi coincide ({}); frequencies must be distinct",
                        osc.phi
                    )));
                }
            }
        }
        if let Some(p) = self.perturbation {
            check_finite("perturbation.scale", p.scale)?;
            if !(p.beta > 0.0) || !p.beta.is_finite() {
                return Err(Error::domain(format!(
                    "perturbation.beta = {} must be positive",
                    p.beta
                )));
            }
        }
        Ok(())
    }
}

/// Oscillating tail term `2 b cos(ρ t − ψ) q_∞(t)` of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelOscillation {
    pub rho: f64,
    #[serde(default)]
    pub psi: f64,
    pub b: f64,
}

/// Interior singularity `coeff · (t₀ − t)^m · 1[t ≤ t₀]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalSingularity {
    pub t0: f64,
    pub m: u32,
    pub coeff: f64,
}

/// Parameters of a kernel on the half-line: a singular part at `t → 0`,
/// a tail at `t → ∞` with oscillations, and optional interior singularities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousKernelSpec {
    pub alpha: f64,
    #[serde(default)]
    pub b_zero: f64,
    #[serde(default)]
    pub b_inf: f64,
    #[serde(default)]
    pub oscillations: Vec<KernelOscillation>,
    #[serde(default)]
    pub local_singularities: Vec<LocalSingularity>,
    #[serde(default)]
    pub cutoffs: CutoffPair,
}

impl ContinuousKernelSpec {
    pub fn new(alpha: f64) -> Self {
        ContinuousKernelSpec {
            alpha,
            b_zero: 0.0,
            b_inf: 0.0,
            oscillations: Vec::new(),
            local_singularities: Vec::new(),
            cutoffs: CutoffPair::default(),
        }
    }

    pub fn with_b_zero(mut self, b: f64) -> Self {
        self.b_zero = b;
        self
    }

    pub fn with_b_inf(mut self, b: f64) -> Self {
        self.b_inf = b;
        self
    }

    pub fn with_oscillation(mut self, rho: f64, psi: f64, b: f64) -> Self {
        self.oscillations.push(KernelOscillation { rho, psi, b });
        self
    }

    pub fn with_singularity(mut self, t0: f64, m: u32, coeff: f64) -> Self {
        self.local_singularities.push(LocalSingularity { t0, m, coeff });
        self
    }

    pub fn with_cutoffs(mut self, cutoffs: CutoffPair) -> Self {
        self.cutoffs = cutoffs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_finite("b_zero", self.b_zero)?;
        check_finite("b_inf", self.b_inf)?;
        self.cutoffs.validate()?;
        for (i, osc) in self.oscillations.iter().enumerate() {
            if !(osc.rho > 0.0) || !osc.rho.is_finite() {
                return Err(Error::domain(format!(
                    "oscillations[{i}].rho = {} must be positive",
                    osc.rho
                )));
            }
            check_finite(&format!("oscillations[{i}].psi"), osc.psi)?;
            check_finite(&format!("oscillations[{i}].b"), osc.b)?;
            if self.oscillations[..i].iter().any(|o| o.rho == osc.rho) {
                return Err(Error::domain(format!(
                    "oscillations[{i}].rho = {} repeats an earlier frequency",
                    osc.rho
                )));
            }
        }
        for (i, s) in self.local_singularities.iter().enumerate() {
            if !(s.t0 > 0.0) || !s.t0.is_finite() {
                return Err(Error::domain(format!(
                    "local_singularities[{i}].t0 = {} must be positive",
                    s.t0
                )));
            }
            check_finite(&format!("local_singularities[{i}].coeff"), s.coeff)?;
            if self.local_singularities[..i].iter().any(|o| o.t0 == s.t0) {
                return Err(Error::domain(format!(
                    "local_singularities[{i}].t0 = {} repeats an earlier location",
                    s.t0
                )));
            }
        }
        if !self.local_singularities.is_empty() && self.b_zero != 0.0 {
            return Err(Error::unsupported(
                "b_zero must be 0 when local_singularities are present: the t→0 and interior \
                 singularities share the symbol's singular point at infinity",
            ));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha = {alpha} must be positive")))
    }
}

fn check_finite(field: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{field} = {x} must be finite")))
    }
}

/// One summand of the `p`-th power coefficient, `p = 1/α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionTerm {
    pub label: String,
    /// Contribution to `(a⁺)^p`.
    pub plus: f64,
    /// Contribution to `(a⁻)^p`.
    pub minus: f64,
}

/// Predicted leading coefficients of `λ_n^± ≈ a^± n^{-α}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub alpha: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    /// Coefficient of the singular values, i.e. of the merged sequence.
    pub a_singular: f64,
    pub terms: Vec<PredictionTerm>,
}

impl AsymptoticPrediction {
    fn from_terms(alpha: f64, terms: Vec<PredictionTerm>) -> Self {
        let plus = sorted_sum(terms.iter().map(|t| t.plus));
        let minus = sorted_sum(terms.iter().map(|t| t.minus));
        let a_plus = plus.powf(alpha);
        let a_minus = minus.powf(alpha);
        AsymptoticPrediction {
            alpha,
            a_plus,
            a_minus,
            a_singular: singular_coefficient(alpha, a_plus, a_minus),
            terms,
        }
    }
}

/// `(a⁺^{1/α} + a⁻^{1/α})^α`: the singular values are the union of
/// the positive and negative eigenvalue sequences.
pub fn singular_coefficient(alpha: f64, a_plus: f64, a_minus: f64) -> f64 {
    let p = 1.0 / alpha;
    (a_plus.powf(p) + a_minus.powf(p)).powf(alpha)
}

// Summing in sorted order makes the result independent of term order.
fn sorted_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

/// `b₊ = (|b| + b)/2`, exactly zero for `b ≤ 0`.
pub fn positive_part(b: f64) -> f64 {
    (b.abs() + b) / 2.0
}

/// `b₋ = (|b| − b)/2`, exactly zero for `b ≥ 0`.
pub fn negative_part(b: f64) -> f64 {
    (b.abs() - b) / 2.0
}

/// Universal coefficient `κ(α) = 2^{−α} π^{1−2α} B(1/(2α), 1/2)^α`.
pub fn kappa(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let ln = -alpha * 2f64.ln() + (1.0 - 2.0 * alpha) * PI.ln() + alpha * ln_beta(0.5 / alpha, 0.5);
    Ok(ln.exp())
}

/// Number of finite differences the error terms must control:
/// `⌊α⌋ + 1` for `α ≥ 1/2`, otherwise 0.
pub fn m_cap(alpha: f64) -> Result<u32> {
    check_alpha(alpha)?;
    Ok(if alpha >= 0.5 { alpha.floor() as u32 + 1 } else { 0 })
}

/// Leading coefficients for a discrete model sequence.
pub fn predict_discrete(spec: &DiscreteSymbolSpec) -> Result<AsymptoticPrediction> {
    spec.validate()?;
    let alpha = spec.alpha;
    let p = 1.0 / alpha;
    let kp = kappa(alpha)?.powf(p);
    let mut terms = vec![
        PredictionTerm {
            label: "b_1".into(),
            plus: kp * positive_part(spec.b_plus1).powf(p),
            minus: kp * negative_part(spec.b_plus1).powf(p),
        },
        PredictionTerm {
            label: "b_-1".into(),
            plus: kp * positive_part(spec.b_minus1).powf(p),
            minus: kp * negative_part(spec.b_minus1).powf(p),
        },
    ];
    for (i, osc) in spec.oscillations.iter().enumerate() {
        let c = kp * osc.b.abs().powf(p);
        terms.push(PredictionTerm {
            label: format!("oscillation[{i}] phi={}", osc.phi),
            plus: c,
            minus: c,
        });
    }
    Ok(AsymptoticPrediction::from_terms(alpha, terms))
}

/// Leading coefficients for a kernel on the half-line, including interior
/// singularities (which require `α = m + 1` and `b_zero = 0`).
pub fn predict_continuous(spec: &ContinuousKernelSpec) -> Result<AsymptoticPrediction> {
    spec.validate()?;
    let alpha = spec.alpha;
    let p = 1.0 / alpha;
    let kp = kappa(alpha)?.powf(p);
    let mut terms = Vec::new();
    for (i, s) in spec.local_singularities.iter().enumerate() {
        let order = f64::from(s.m) + 1.0;
        if (alpha - order).abs() > 1e-12 * order {
            return Err(Error::unsupported(format!(
                "local_singularities[{i}] has m = {} which requires alpha = {order}, got {alpha}",
                s.m
            )));
        }
        let c = s.t0 / (2.0 * PI) * (factorial(s.m) * s.coeff.abs()).powf(p);
        terms.push(PredictionTerm {
            label: format!("singularity[{i}] t0={} m={}", s.t0, s.m),
            plus: c,
            minus: c,
        });
    }
    terms.push(PredictionTerm {
        label: "b_0".into(),
        plus: kp * positive_part(spec.b_zero).powf(p),
        minus: kp * negative_part(spec.b_zero).powf(p),
    });
    terms.push(PredictionTerm {
        label: "b_inf".into(),
        plus: kp * positive_part(spec.b_inf).powf(p),
        minus: kp * negative_part(spec.b_inf).powf(p),
    });
    for (i, osc) in spec.oscillations.iter().enumerate() {
        let c = kp * osc.b.abs().powf(p);
        terms.push(PredictionTerm {
            label: format!("oscillation[{i}] rho={}", osc.rho),
            plus: c,
            minus: c,
        });
    }
    Ok(AsymptoticPrediction::from_terms(alpha, terms))
}

/// `m! t₀^{m+1} (2πn)^{−m−1}`: the `n`-th eigenvalue (either sign) of the
/// operator with kernel `(t₀ − t)^m 1[t ≤ t₀]`, to leading order.
pub fn predict_local_term(t0: f64, m: u32, n: u64) -> Result<f64> {
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(Error::domain(format!("t0 = {t0} must be positive")));
    }
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let e = i32::try_from(m).map_err(|_| Error::domain("m too large"))? + 1;
    Ok(factorial(m) * (t0 / (2.0 * PI * n as f64)).powi(e))
}

pub(crate) fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_special_values() {
        assert!((kappa(1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((kappa(0.5).unwrap() - 1.0).abs() < 1e-12);
        // 40-digit Beta-function oracle
        let want = 0.221_735_292_144_528_85;
        assert!((kappa(2.0).unwrap() - want).abs() / want < 1e-10);
    }

    #[test]
    fn kappa_rejects_non_positive() {
        assert!(matches!(kappa(0.0), Err(Error::Domain(_))));
        assert!(matches!(kappa(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn kappa_other_reference_values() {
        for (a, want) in [
            (0.25, 1.601_592_850_984_209_5),
            (1.5, 0.309_060_692_734_014_69),
            (3.0, 0.157_986_346_797_883_15),
            (0.7, 0.733_982_439_130_006_48),
        ] {
            assert!((kappa(a).unwrap() - want).abs() / want < 1e-12, "alpha={a}");
        }
    }

    #[test]
    fn m_cap_cases() {
        assert_eq!(m_cap(0.3).unwrap(), 0);
        assert_eq!(m_cap(0.5).unwrap(), 1);
        assert_eq!(m_cap(2.7).unwrap(), 3);
        assert!(m_cap(0.0).is_err());
    }

    #[test]
    fn discrete_examples() {
        let p = predict_discrete(&DiscreteSymbolSpec::new(1.0).with_b_plus1(1.0)).unwrap();
        assert!((p.a_plus - 0.5).abs() < 1e-14);
        assert_eq!(p.a_minus, 0.0);

        let p = predict_discrete(&DiscreteSymbolSpec::new(1.0).with_oscillation(1.0, 0.0, 1.0)).unwrap();
        assert!((p.a_plus - 0.5).abs() < 1e-14);
        assert_eq!(p.a_plus, p.a_minus);

        let spec = DiscreteSymbolSpec::new(1.0)
            .with_b_plus1(1.0)
            .with_b_minus1(-1.0)
            .with_oscillation(1.0, 0.0, 2.0);
        let p = predict_discrete(&spec).unwrap();
        assert!((p.a_plus - 1.5).abs() < 1e-14);
        assert!((p.a_minus - 1.5).abs() < 1e-14);
    }

    #[test]
    fn continuous_examples() {
        let p = predict_continuous(&ContinuousKernelSpec::new(1.0).with_b_zero(1.0).with_b_inf(1.0)).unwrap();
        assert!((p.a_plus - 1.0).abs() < 1e-14);
        assert_eq!(p.a_minus, 0.0);

        let tri = ContinuousKernelSpec::new(1.0).with_singularity(1.0, 0, 1.0);
        let p = predict_continuous(&tri).unwrap();
        assert!((p.a_plus - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(p.a_plus, p.a_minus);

        let p = predict_continuous(&tri.clone().with_b_inf(1.0)).unwrap();
        assert!((p.a_plus - (1.0 / (2.0 * PI) + 0.5)).abs() < 1e-14);
        assert!((p.a_minus - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn continuous_rejects_unsupported_combinations() {
        let wrong_order = ContinuousKernelSpec::new(2.0).with_singularity(1.0, 0, 1.0);
        assert!(matches!(predict_continuous(&wrong_order), Err(Error::Unsupported(_))));
        let mixed = ContinuousKernelSpec::new(1.0)
            .with_b_zero(1.0)
            .with_singularity(1.0, 0, 1.0);
        assert!(matches!(predict_continuous(&mixed), Err(Error::Unsupported(_))));
    }

    #[test]
    fn local_term_examples() {
        assert!((predict_local_term(1.0, 0, 1).unwrap() - 0.159_154_943_091_895_35).abs() < 1e-15);
        assert!((predict_local_term(2.0, 1, 1).unwrap() - 1.0 / (PI * PI)).abs() < 1e-15);
        assert!((predict_local_term(1.0, 0, 10).unwrap() - 1.0 / (20.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn validation_messages_name_fields() {
        let bad = DiscreteSymbolSpec::new(1.0).with_oscillation(PI, 0.0, 1.0);
        let msg = bad.validate().unwrap_err().to_string();
        assert!(
            msg.contains("oscillations[0].phi") && msg.contains("open interval"),
            "{msg}"
        );
        let dup = DiscreteSymbolSpec::new(1.0)
            .with_oscillation(1.0, 0.0, 1.0)
            .with_oscillation(1.0, 0.3, 2.0);
        assert!(dup.validate().is_err());
        assert!(DiscreteSymbolSpec::new(1.0)
            .with_perturbation(1.0, 0.0)
            .validate()
            .is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spec_strategy() -> impl Strategy<Value = DiscreteSymbolSpec> {
            (
                0.2f64..4.0,
                -3.0f64..3.0,
                -3.0f64..3.0,
                prop::collection::vec((0.01f64..3.1, -10.0f64..10.0, -3.0f64..3.0), 0..5),
            )
                .prop_map(|(alpha, b1, bm1, osc)| {
                    let mut s = DiscreteSymbolSpec::new(alpha).with_b_plus1(b1).with_b_minus1(bm1);
                    for (i, (phi, psi, b)) in osc.into_iter().enumerate() {
                        // keep frequencies distinct
                        s = s.with_oscillation((phi + 1e-3 * i as f64).min(3.1), psi, b);
                    }
                    s
                })
                .prop_filter("valid", |s| s.validate().is_ok())
        }

        proptest! {
            #[test]
            fn permutation_and_phase_invariance(spec in spec_strategy()) {
                let base = predict_discrete(&spec).unwrap();
                let mut rev = spec.clone();
                rev.oscillations.reverse();
                for o in &mut rev.oscillations {
                    o.psi += 2.0 * PI;
                }
                let other = predict_discrete(&rev).unwrap();
                prop_assert_eq!(base.a_plus, other.a_plus);
                prop_assert_eq!(base.a_minus, other.a_minus);
            }

            #[test]
            fn sign_flip_swaps_coefficients(spec in spec_strategy()) {
                let base = predict_discrete(&spec).unwrap();
                let mut flipped = spec.clone();
                flipped.b_plus1 = -flipped.b_plus1;
                flipped.b_minus1 = -flipped.b_minus1;
                let f = predict_discrete(&flipped).unwrap();
                prop_assert_eq!(base.a_plus, f.a_minus);
                prop_assert_eq!(base.a_minus, f.a_plus);
            }

            #[test]
            fn oscillation_only_is_symmetric(mut spec in spec_strategy()) {
                spec.b_plus1 = 0.0;
                spec.b_minus1 = 0.0;
                let p = predict_discrete(&spec).unwrap();
                prop_assert_eq!(p.a_plus, p.a_minus);
            }

            #[test]
            fn singular_identity_holds(spec in spec_strategy()) {
                let p = predict_discrete(&spec).unwrap();
                prop_assert_eq!(p.a_singular, singular_coefficient(p.alpha, p.a_plus, p.a_minus));
                prop_assert!(p.a_plus >= 0.0 && p.a_minus >= 0.0);
            }

            #[test]
            fn local_term_scaling(t0 in 0.1f64..5.0, m in 0u32..5, n in 1u64..1000) {
                let v = predict_local_term(t0, m, n).unwrap();
                let back = v * (2.0 * PI * n as f64).powi(m as i32 + 1);
                let want = factorial(m) * t0.powi(m as i32 + 1);
                prop_assert!((back - want).abs() <= 1e-13 * want);
            }
        }
    }
}
