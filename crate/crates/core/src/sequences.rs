//! Pointwise evaluation of the model sequences `h(j)` and kernels `𝐡(t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{m_cap, ContinuousKernelSpec, DiscreteSymbolSpec};

/// `q(j) = j^{-1} (ln j)^{-α}` for `j ≥ 2`, zero for `j ∈ {0, 1}`.
pub fn q_discrete(alpha: f64, j: u64) -> f64 {
    if j < 2 {
        return 0.0;
    }
    let x = j as f64;
    1.0 / (x * x.ln().powf(alpha))
}

/// Evaluates the model sequence at index `j`.
pub fn eval_discrete(spec: &DiscreteSymbolSpec, j: u64) -> f64 {
    if j < 2 {
        return 0.0;
    }
    let x = j as f64;
    let q = q_discrete(spec.alpha, j);
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut factor = spec.b_plus1 + spec.b_minus1 * sign;
    for osc in &spec.oscillations {
        factor += 2.0 * osc.b * phase_cos(osc.phi * x - osc.psi);
    }
    let mut value = q * factor;
    if let Some(p) = spec.perturbation {
        value += p.scale / (x * x.ln().powf(spec.alpha + p.beta));
    }
    value
}

fn phase_cos(theta: f64) -> f64 {
    theta.cos()
}

/// Smooth step `s(x) = e(x)/(e(x)+e(1−x))`, `e(x) = exp(−1/x)` for `x > 0`.
/// Exactly 0 for `x ≤ 0` and exactly 1 for `x ≥ 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// Parameters of the cutoffs `χ₀` (1 near 0) and `χ_∞` (1 near infinity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffPair {
    pub c1: f64,
    pub c2: f64,
    #[serde(rename = "C1")]
    pub big_c1: f64,
    #[serde(rename = "C2")]
    pub big_c2: f64,
}

impl Default for CutoffPair {
    fn default() -> Self {
        CutoffPair {
            c1: 0.25,
            c2: 0.5,
            big_c1: 1.5,
            big_c2: 2.0,
        }
    }
}

impl CutoffPair {
    pub fn new(c1: f64, c2: f64, big_c1: f64, big_c2: f64) -> Result<Self> {
        let c = CutoffPair { c1, c2, big_c1, big_c2 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.c1
            && self.c1 < self.c2
            && self.c2 < 1.0
            && 1.0 < self.big_c1
            && self.big_c1 < self.big_c2
            && self.big_c2.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "cutoffs must satisfy 0 < c1 < c2 < 1 < C1 < C2, got c1={}, c2={}, C1={}, C2={}",
                self.c1, self.c2, self.big_c1, self.big_c2
            )))
        }
    }

    /// `χ₀(t)`: 1 for `|t| ≤ c1`, 0 for `|t| ≥ c2`.
    pub fn chi_zero(&self, t: f64) -> f64 {
        1.0 - smooth_step((t.abs() - self.c1) / (self.c2 - self.c1))
    }

    /// `χ_∞(t)`: 0 for `|t| ≤ C1`, 1 for `|t| ≥ C2`.
    pub fn chi_inf(&self, t: f64) -> f64 {
        smooth_step((t.abs() - self.big_c1) / (self.big_c2 - self.big_c1))
    }

    /// `q₀(t) = χ₀(t) t^{-1} (ln(1/t))^{-α}`.
    pub fn q_zero(&self, alpha: f64, t: f64) -> f64 {
        let chi = self.chi_zero(t);
        if chi == 0.0 {
            return 0.0;
        }
        chi / (t * (-t.ln()).powf(alpha))
    }

    /// `q_∞(t) = χ_∞(t) t^{-1} (ln t)^{-α}`.
    pub fn q_inf(&self, alpha: f64, t: f64) -> f64 {
        let chi = self.chi_inf(t);
        if chi == 0.0 {
            return 0.0;
        }
        chi / (t * t.ln().powf(alpha))
    }
}

/// Evaluates the kernel at `t > 0`.
pub fn eval_kernel(spec: &ContinuousKernelSpec, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("kernel argument t = {t} must be positive")));
    }
    Ok(kernel_value(spec, t))
}

pub(crate) fn kernel_value(spec: &ContinuousKernelSpec, t: f64) -> f64 {
    let c = &spec.cutoffs;
    let mut v = 0.0;
    if spec.b_zero != 0.0 {
        v += spec.b_zero * c.q_zero(spec.alpha, t);
    }
    if spec.b_inf != 0.0 || !spec.oscillations.is_empty() {
        let qi = c.q_inf(spec.alpha, t);
        if qi != 0.0 {
            let mut factor = spec.b_inf;
            for osc in &spec.oscillations {
                factor += 2.0 * osc.b * phase_cos(osc.rho * t - osc.psi);
            }
            v += factor * qi;
        }
    }
    for s in &spec.local_singularities {
        if t <= s.t0 {
            v += s.coeff * (s.t0 - t).powi(s.m as i32);
        }
    }
    v
}

/// `m`-fold forward difference `g^{(k+1)}(j) = g^{(k)}(j+1) − g^{(k)}(j)`.
pub fn finite_difference(values: &[f64], m: usize) -> Result<Vec<f64>> {
    if values.is_empty() || m > values.len() - 1 {
        return Err(Error::domain(format!(
            "cannot take {m} differences of a sequence of length {}",
            values.len()
        )));
    }
    let mut cur = values.to_vec();
    for _ in 0..m {
        cur = cur.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(cur)
}

/// Windowed maxima of `|g^{(m)}(j)| j^{1+m} (ln j)^α` for one order `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub m: usize,
    /// `(j_lo, j_hi_exclusive, max)` per dyadic window.
    pub windows: Vec<(u64, u64, f64)>,
    pub decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorDecayReport {
    pub alpha: f64,
    pub profiles: Vec<DecayProfile>,
    pub pass: bool,
}

/// Numerical proxy for `g^{(m)}(j) = o(j^{-1-m} (ln j)^{-α})`, `m ≤ m_max`:
/// the scaled maxima over dyadic windows must not increase and must drop
/// overall (or vanish identically).
pub fn check_error_decay(values: &[f64], j0: u64, alpha: f64, m_max: usize) -> Result<ErrorDecayReport> {
    let cap = m_cap(alpha)? as usize;
    if m_max > cap {
        return Err(Error::domain(format!("m_max = {m_max} exceeds m_cap(alpha) = {cap}")));
    }
    let mut profiles = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let diffs = finite_difference(values, m)?;
        let mut windows: Vec<(u64, u64, f64)> = Vec::new();
        for (i, d) in diffs.iter().enumerate() {
            let j = j0 + i as u64;
            if j < 2 {
                continue;
            }
            let jf = j as f64;
            let scaled = d.abs() * jf.powi(1 + m as i32) * jf.ln().powf(alpha);
            let lo = 1u64 << (63 - j.leading_zeros());
            match windows.last_mut() {
                Some(w) if w.0 == lo => w.2 = w.2.max(scaled),
                _ => windows.push((lo, lo * 2, scaled)),
            }
        }
        let decreasing = decay_verdict(&windows);
        profiles.push(DecayProfile { m, windows, decreasing });
    }
    let pass = profiles.iter().all(|p| p.decreasing);
    Ok(ErrorDecayReport { alpha, profiles, pass })
}

fn decay_verdict(windows: &[(u64, u64, f64)]) -> bool {
    let maxima: Vec<f64> = windows.iter().map(|w| w.2).collect();
    if maxima.iter().all(|&x| x == 0.0) {
        return true;
    }
    if maxima.len() < 2 {
        return false;
    }
    let monotone = maxima.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let first = maxima[0];
    let last = maxima[maxima.len() - 1];
    monotone && last < first * (1.0 - 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2, PI};

    #[test]
    fn discrete_examples() {
        let s = DiscreteSymbolSpec::new(1.0).with_b_plus1(1.0);
        assert_eq!(eval_discrete(&s, 0), 0.0);
        assert_eq!(eval_discrete(&s, 1), 0.0);
        assert!((eval_discrete(&s, 2) - 0.721_347_520_444_481_7).abs() < 1e-15);

        let s = DiscreteSymbolSpec::new(1.0).with_oscillation(FRAC_PI_2, 0.0, 1.0);
        assert!((eval_discrete(&s, 4) - 2.0 / (4.0 * 4f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn phase_shift_is_exact() {
        let a = DiscreteSymbolSpec::new(1.3).with_oscillation(0.7, 0.4, 1.1);
        let b = DiscreteSymbolSpec::new(1.3).with_oscillation(0.7, 0.4 + 2.0 * PI, 1.1);
        for j in 0..500 {
            let (x, y) = (eval_discrete(&a, j), eval_discrete(&b, j));
            // ψ and ψ + 2π differ only by the rounding of the shifted phase
            assert!((x - y).abs() <= 1e-13 * q_discrete(1.3, j), "j={j}");
        }
    }

    #[test]
    fn kernel_examples() {
        let cut = CutoffPair::new(0.2, 0.5, 1.5, 2.0).unwrap();
        let s = ContinuousKernelSpec::new(1.0).with_b_zero(1.0).with_cutoffs(cut);
        assert!((eval_kernel(&s, 0.1).unwrap() - 10.0 / 10f64.ln()).abs() < 1e-13);

        let tri = ContinuousKernelSpec::new(1.0).with_singularity(1.0, 0, 1.0);
        assert_eq!(eval_kernel(&tri, 0.5).unwrap(), 1.0);
        assert_eq!(eval_kernel(&tri, 1.5).unwrap(), 0.0);

        let tail = ContinuousKernelSpec::new(1.0).with_b_inf(1.0);
        let t = E * E;
        assert!((eval_kernel(&tail, t).unwrap() - (-2f64).exp() / 2.0).abs() < 1e-15);

        assert!(matches!(eval_kernel(&tail, 0.0), Err(Error::Domain(_))));
        assert!(eval_kernel(&tail, -1.0).is_err());
    }

    #[test]
    fn cutoff_plateaus_and_monotonicity() {
        let c = CutoffPair::default();
        assert_eq!(c.chi_zero(0.0), 1.0);
        assert_eq!(c.chi_zero(c.c1), 1.0);
        assert_eq!(c.chi_zero(c.c2), 0.0);
        assert_eq!(c.chi_zero(0.9), 0.0);
        assert_eq!(c.chi_inf(c.big_c1), 0.0);
        assert_eq!(c.chi_inf(c.big_c2), 1.0);
        assert_eq!(c.chi_inf(100.0), 1.0);
        let mut prev0 = 1.0;
        let mut prev_inf = 0.0;
        for i in 0..=1000 {
            let t = 0.2 + 2.0 * i as f64 / 1000.0;
            let (a, b) = (c.chi_zero(t), c.chi_inf(t));
            assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
            assert!(a <= prev0 && b >= prev_inf);
            prev0 = a;
            prev_inf = b;
        }
    }

    #[test]
    fn finite_difference_examples() {
        assert_eq!(finite_difference(&[0., 1., 2., 3.], 1).unwrap(), vec![1., 1., 1.]);
        assert_eq!(finite_difference(&[0., 1., 2., 3.], 2).unwrap(), vec![0., 0.]);
        assert_eq!(finite_difference(&[1., 2., 4., 8.], 1).unwrap(), vec![1., 2., 4.]);
        assert!(finite_difference(&[1., 2.], 2).is_err());
        assert!(finite_difference(&[], 0).is_err());
    }

    #[test]
    fn error_decay_examples() {
        let j0 = 2u64;
        let n = 1 << 14;
        let inv_sq: Vec<f64> = (j0..n).map(|j| 1.0 / (j as f64).powi(2)).collect();
        assert!(check_error_decay(&inv_sq, j0, 1.0, 0).unwrap().pass);

        let exact: Vec<f64> = (j0..n).map(|j| q_discrete(1.0, j)).collect();
        let r = check_error_decay(&exact, j0, 1.0, 0).unwrap();
        assert!(!r.pass);
        for w in &r.profiles[0].windows {
            assert!((w.2 - 1.0).abs() < 1e-12);
        }

        let zero = vec![0.0; 1000];
        let r = check_error_decay(&zero, j0, 1.0, 1).unwrap();
        assert!(r.pass);
        assert!(r.profiles.iter().all(|p| p.windows.iter().all(|w| w.2 == 0.0)));

        assert!(check_error_decay(&zero, j0, 0.3, 1).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn kernel_is_linear_in_coefficients(
                t in 0.01f64..40.0,
                b0 in -2.0f64..2.0, binf in -2.0f64..2.0, bl in -2.0f64..2.0, tb in -2.0f64..2.0,
                scale in -3.0f64..3.0,
            ) {
                let make = |s: f64| ContinuousKernelSpec::new(1.4)
                    .with_b_zero(b0 * s)
                    .with_b_inf(binf * s)
                    .with_oscillation(1.3, 0.2, bl * s);
                let with_sing = |s: f64| ContinuousKernelSpec::new(1.0)
                    .with_b_inf(binf * s)
                    .with_singularity(3.0, 0, tb * s);
                for (a, b) in [(make(1.0), make(scale)), (with_sing(1.0), with_sing(scale))] {
                    let x = eval_kernel(&a, t).unwrap();
                    let y = eval_kernel(&b, t).unwrap();
                    prop_assert!((y - scale * x).abs() <= 1e-12 * (1.0 + x.abs() * scale.abs()));
                }
            }

            #[test]
            fn difference_orders_compose(
                v in prop::collection::vec(-10.0f64..10.0, 8..40),
                m1 in 0usize..3, m2 in 0usize..3,
            ) {
                let direct = finite_difference(&v, m1 + m2).unwrap();
                let nested = finite_difference(&finite_difference(&v, m1).unwrap(), m2).unwrap();
                prop_assert_eq!(direct, nested);
            }
        }
    }
}
