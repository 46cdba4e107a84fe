//! Windowed fits of computed spectra against the predicted power laws.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::eigensolve::{LanczosParams, SpectrumResult};
use crate::error::{Error, Result};
use crate::model::{predict_discrete, AsymptoticPrediction, DiscreteSymbolSpec, Oscillation};
use crate::pipeline::discrete_spectrum;

/// Default fit window.
pub const DEFAULT_WINDOW: RangeInclusive<usize> = 8..=32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// Median of `n^α λ_n` over the window.
    #[default]
    Plain,
    /// Least squares of `n^α λ_n ≈ a + c / log n`.
    LogCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitRow {
    pub n: usize,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub scaled_plus: f64,
    pub scaled_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub alpha: f64,
    pub window: (usize, usize),
    pub model: FitModel,
    pub a_hat_plus: f64,
    pub a_hat_minus: f64,
    /// Coefficients of the `1/log n` term (log-corrected model only).
    pub c_hat_plus: Option<f64>,
    pub c_hat_minus: Option<f64>,
    pub per_n: Vec<FitRow>,
    /// `(max − min) / max` of the scaled values, worst of both signs.
    pub drift: f64,
    /// Largest absolute fit residual of the scaled values.
    pub residual: f64,
}

fn check_window(window: &RangeInclusive<usize>) -> Result<(usize, usize)> {
    let (lo, hi) = (*window.start(), *window.end());
    if lo == 0 || lo > hi {
        return Err(Error::domain(format!(
            "window {lo}..={hi} is empty (indices are 1-based)"
        )));
    }
    Ok((lo, hi))
}

/// Median; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lo = values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if hi <= 0.0 {
        0.0
    } else {
        (hi - lo) / hi
    }
}

// Returns (a, c, max residual) of y ≈ a + c x.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - xm) * (yi - ym)).sum();
    let c = sxy / sxx;
    let a = ym - c * xm;
    let res = x
        .iter()
        .zip(y)
        .fold(0.0f64, |r, (xi, yi)| r.max((yi - a - c * xi).abs()));
    (a, c, res)
}

/// Fits `λ_n^± ≈ a^± n^{−α}` over `window`.
pub fn fit_coefficient(
    s: &SpectrumResult,
    alpha: f64,
    window: RangeInclusive<usize>,
    model: FitModel,
) -> Result<FitReport> {
    let (lo, hi) = check_window(&window)?;
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha = {alpha} must be positive")));
    }
    if model == FitModel::LogCorrected && (lo < 2 || lo == hi) {
        return Err(Error::domain(format!(
            "the log-corrected fit needs a window of at least two indices starting at n ≥ 2, got {lo}..={hi}"
        )));
    }
    let available = s.lambda_plus.len().max(s.lambda_minus.len()).max(s.certified);
    let mut per_n = Vec::with_capacity(hi - lo + 1);
    for n in lo..=hi {
        let (Some(lp), Some(lm)) = (s.plus(n), s.minus(n)) else {
            return Err(Error::domain(format!(
                "window end {hi} exceeds the {available} resolved eigenvalues"
            )));
        };
        let w = (n as f64).powf(alpha);
        per_n.push(FitRow {
            n,
            lambda_plus: lp,
            lambda_minus: lm,
            scaled_plus: w * lp,
            scaled_minus: w * lm,
        });
    }
    let plus: Vec<f64> = per_n.iter().map(|r| r.scaled_plus).collect();
    let minus: Vec<f64> = per_n.iter().map(|r| r.scaled_minus).collect();
    let drift = spread(&plus).max(spread(&minus));
    let (a_plus, a_minus, c_plus, c_minus, residual) = match model {
        FitModel::Plain => {
            let (mp, mm) = (median(&plus), median(&minus));
            let res = plus
                .iter()
                .map(|x| (x - mp).abs())
                .chain(minus.iter().map(|x| (x - mm).abs()))
                .fold(0.0, f64::max);
            (mp, mm, None, None, res)
        }
        FitModel::LogCorrected => {
            let x: Vec<f64> = per_n.iter().map(|r| 1.0 / (r.n as f64).ln()).collect();
            let (ap, cp, rp) = line_fit(&x, &plus);
            let (am, cm, rm) = line_fit(&x, &minus);
            (ap, am, Some(cp), Some(cm), rp.max(rm))
        }
    };
    Ok(FitReport {
        alpha,
        window: (lo, hi),
        model,
        a_hat_plus: a_plus.max(0.0),
        a_hat_minus: a_minus.max(0.0),
        c_hat_plus: c_plus,
        c_hat_minus: c_minus,
        per_n,
        drift,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryStats {
    pub window: (usize, usize),
    /// `(n, λ_n⁺ / λ_n⁻)`.
    pub ratios: Vec<(usize, f64)>,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

pub fn symmetry_ratio(s: &SpectrumResult, window: RangeInclusive<usize>) -> Result<SymmetryStats> {
    let (lo, hi) = check_window(&window)?;
    let mut ratios = Vec::with_capacity(hi - lo + 1);
    for n in lo..=hi {
        let lp = s.plus(n).ok_or_else(|| {
            Error::domain(format!(
                "only {} positive eigenvalues available, window needs {hi}",
                s.lambda_plus.len()
            ))
        })?;
        match s.minus(n) {
            Some(lm) if lm > 0.0 => ratios.push((n, lp / lm)),
            _ => {
                return Err(Error::domain(format!(
                    "only {} negative eigenvalues available, window needs {hi}",
                    s.lambda_minus.len()
                )))
            }
        }
    }
    let r: Vec<f64> = ratios.iter().map(|x| x.1).collect();
    Ok(SymmetryStats {
        window: (lo, hi),
        median: median(&r),
        min: r.iter().copied().fold(f64::INFINITY, f64::min),
        max: r.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ratios,
    })
}

/// Singular support points on the circle: `1`, `−1`, and `e^{±iφ}` stored as `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum SupportPoint {
    One,
    MinusOne,
    Angle(f64),
}

fn support(spec: &DiscreteSymbolSpec) -> Vec<SupportPoint> {
    let mut v = Vec::new();
    if spec.b_plus1 != 0.0 {
        v.push(SupportPoint::One);
    }
    if spec.b_minus1 != 0.0 {
        v.push(SupportPoint::MinusOne);
    }
    v.extend(
        spec.oscillations
            .iter()
            .filter(|o| o.b != 0.0)
            .map(|o| SupportPoint::Angle(o.phi)),
    );
    v
}

fn overlaps(a: SupportPoint, b: SupportPoint) -> bool {
    match (a, b) {
        (SupportPoint::Angle(x), SupportPoint::Angle(y)) => (x - y).abs() <= 1e-12,
        _ => a == b,
    }
}

/// Checks that singular supports are pairwise disjoint and returns the sum spec.
pub fn sum_specs(specs: &[DiscreteSymbolSpec]) -> Result<DiscreteSymbolSpec> {
    let first = specs.first().ok_or_else(|| Error::domain("no specs given"))?;
    let alpha = first.alpha;
    for (i, s) in specs.iter().enumerate() {
        s.validate()?;
        if s.alpha != alpha {
            return Err(Error::domain(format!(
                "specs[{i}].alpha = {} differs from specs[0].alpha = {alpha}",
                s.alpha
            )));
        }
        if s.perturbation.is_some() {
            return Err(Error::unsupported(format!(
                "specs[{i}] carries a perturbation term; localization compares leading terms only"
            )));
        }
        for (k, t) in specs.iter().enumerate().take(i) {
            for a in support(s) {
                if support(t).into_iter().any(|b| overlaps(a, b)) {
                    return Err(Error::domain(format!(
                        "singular supports of specs[{k}] and specs[{i}] overlap at {a:?}"
                    )));
                }
            }
        }
    }
    let mut oscillations: Vec<Oscillation> = specs.iter().flat_map(|s| s.oscillations.iter().copied()).collect();
    oscillations.sort_by(|a, b| a.phi.total_cmp(&b.phi));
    Ok(DiscreteSymbolSpec {
        alpha,
        b_plus1: specs.iter().map(|s| s.b_plus1).sum(),
        b_minus1: specs.iter().map(|s| s.b_minus1).sum(),
        oscillations,
        perturbation: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentFit {
    pub prediction: AsymptoticPrediction,
    pub fit: FitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationReport {
    pub alpha: f64,
    /// Prediction for the summed spec.
    pub predicted: AsymptoticPrediction,
    /// `(Σ a_i^{±p})^α` over the component predictions.
    pub additive_plus: f64,
    pub additive_minus: f64,
    pub sum_fit: FitReport,
    pub components: Vec<ComponentFit>,
    /// `(Σ â_i^{±p})^α` over the component fits.
    pub fitted_additive_plus: f64,
    pub fitted_additive_minus: f64,
}

fn power_sum(alpha: f64, values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.map(|a| a.powf(1.0 / alpha)).collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum::<f64>().powf(alpha)
}

/// [`compare_localization`] with a caller-supplied solver.
pub fn compare_localization_with<F>(
    specs: &[DiscreteSymbolSpec],
    window: RangeInclusive<usize>,
    model: FitModel,
    mut solve: F,
) -> Result<LocalizationReport>
where
    F: FnMut(&DiscreteSymbolSpec) -> Result<SpectrumResult>,
{
    let sum = sum_specs(specs)?;
    let alpha = sum.alpha;
    let predicted = predict_discrete(&sum)?;
    let sum_fit = fit_coefficient(&solve(&sum)?, alpha, window.clone(), model)?;
    let mut components = Vec::with_capacity(specs.len());
    let mut component_predictions = Vec::with_capacity(specs.len());
    for s in specs {
        let prediction = predict_discrete(s)?;
        component_predictions.push(prediction.clone());
        let fit = if specs.len() == 1 {
            sum_fit.clone()
        } else {
            fit_coefficient(&solve(s)?, alpha, window.clone(), model)?
        };
        components.push(ComponentFit { prediction, fit });
    }
    Ok(LocalizationReport {
        alpha,
        additive_plus: power_sum(alpha, component_predictions.iter().map(|p| p.a_plus)),
        additive_minus: power_sum(alpha, component_predictions.iter().map(|p| p.a_minus)),
        fitted_additive_plus: power_sum(alpha, components.iter().map(|c| c.fit.a_hat_plus)),
        fitted_additive_minus: power_sum(alpha, components.iter().map(|c| c.fit.a_hat_minus)),
        predicted,
        sum_fit,
        components,
    })
}

/// Fits the summed spec and each component at truncation order `n`.
pub fn compare_localization(
    specs: &[DiscreteSymbolSpec],
    n: usize,
    params: &LanczosParams,
    window: RangeInclusive<usize>,
    model: FitModel,
) -> Result<LocalizationReport> {
    compare_localization_with(specs, window, model, |s| discrete_spectrum(s, n, params))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationRow {
    pub n: usize,
    pub a_hat_plus: f64,
    pub a_hat_minus: f64,
    pub deviation_plus: f64,
    pub deviation_minus: f64,
    /// Larger of the two deviations.
    pub deviation: f64,
    pub converged: bool,
    pub matvecs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    pub predicted: AsymptoticPrediction,
    pub window: (usize, usize),
    pub model: FitModel,
    pub rows: Vec<TruncationRow>,
    /// Orders at which the deviation grew compared with the previous order.
    pub worsened: Vec<usize>,
}

/// [`truncation_study`] with a caller-supplied spectrum producer.
pub fn truncation_study_with<F>(
    predicted: AsymptoticPrediction,
    n_list: &[usize],
    window: RangeInclusive<usize>,
    model: FitModel,
    mut produce: F,
) -> Result<TruncationReport>
where
    F: FnMut(usize) -> Result<SpectrumResult>,
{
    if n_list.is_empty() {
        return Err(Error::domain("truncation study needs at least one order N"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain(format!("orders {n_list:?} must be strictly increasing")));
    }
    let (lo, hi) = check_window(&window)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let s = produce(n)?;
        let fit = fit_coefficient(&s, predicted.alpha, window.clone(), model)?;
        let dp = (fit.a_hat_plus - predicted.a_plus).abs();
        let dm = (fit.a_hat_minus - predicted.a_minus).abs();
        rows.push(TruncationRow {
            n,
            a_hat_plus: fit.a_hat_plus,
            a_hat_minus: fit.a_hat_minus,
            deviation_plus: dp,
            deviation_minus: dm,
            deviation: dp.max(dm),
            converged: s.converged,
            matvecs: s.matvecs,
        });
    }
    let worsened = rows
        .windows(2)
        .filter(|w| w[1].deviation > w[0].deviation)
        .map(|w| w[1].n)
        .collect();
    Ok(TruncationReport {
        predicted,
        window: (lo, hi),
        model,
        rows,
        worsened,
    })
}

pub fn truncation_study(
    spec: &DiscreteSymbolSpec,
    n_list: &[usize],
    params: &LanczosParams,
    window: RangeInclusive<usize>,
    model: FitModel,
) -> Result<TruncationReport> {
    let predicted = predict_discrete(spec)?;
    truncation_study_with(predicted, n_list, window, model, |n| discrete_spectrum(spec, n, params))
}
