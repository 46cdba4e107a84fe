//! Symbols on the circle and the line.
//!
//! Covers the partial sums of `ω_ζ`, symbols with a logarithmic singularity
//! at `θ = 0` and the leading coefficient of their Fourier coefficients, the
//! symbol `τ_m` of an interior kernel singularity, the model symbols `ω₀`,
//! `ω_∞` (as oscillatory integrals), and the Möbius transport between the
//! circle and the line.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::factorial;
use crate::par::{self, Parallelism};
use crate::sequences::{q_discrete, smooth_step, CutoffPair};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Partial sum `Σ_{j=2}^{J} j^{-1}(ln j)^{-α} ((μ/ζ)^j − (μ/ζ)^{-j})` at `μ = e^{iθ}`.
pub fn eval_omega_zeta(zeta: Complex64, alpha: f64, terms: usize, theta: f64) -> Result<Complex64> {
    if terms < 2 {
        return Err(Error::domain(format!("truncation J = {terms} must be at least 2")));
    }
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("zeta = {zeta} must lie on the unit circle")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::domain(format!("alpha = {alpha} must be non-negative")));
    }
    let phase = theta - zeta.arg();
    // each term is 2i sin(jφ) q(j)
    let mut acc = 0.0;
    for j in 2..=terms as u64 {
        acc += q_discrete(alpha, j) * (j as f64 * phase).sin();
    }
    Ok(Complex64::new(0.0, 2.0 * acc))
}

/// Angles `θ_k = 2πk/L` folded into `(−π, π]`.
pub fn circle_angles(len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| {
            let t = TAU * k as f64 / len as f64;
            if t > PI {
                t - TAU
            } else {
                t
            }
        })
        .collect()
}

/// Samples of the `ω_ζ` partial sum on `2^log2_len` uniform points.
pub fn sample_omega_zeta(
    zeta: Complex64,
    alpha: f64,
    terms: usize,
    log2_len: u32,
    mode: Parallelism,
) -> Result<Vec<Complex64>> {
    eval_omega_zeta(zeta, alpha, terms, 0.0)?;
    let thetas = circle_angles(1 << log2_len);
    Ok(par::map_range(mode, thetas.len(), |k| {
        eval_omega_zeta(zeta, alpha, terms, thetas[k]).expect("arguments validated")
    }))
}

/// Discrete Fourier coefficients `c_j = L^{-1} Σ_k f(θ_k) e^{−ijθ_k}`, so a
/// pure sample of `μ^j` yields 1 at index `j` (negative `j` at `L + j`).
pub fn fourier_coefficients(samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let len = samples.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::domain(format!("sample count {len} must be a power of two")));
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let inv = 1.0 / len as f64;
    buf.iter_mut().for_each(|z| *z *= inv);
    Ok(buf)
}

/// Symbol of the kernel `(t₀ − t)^m 1[t ≤ t₀]`:
/// `τ_m(x) = m! (ix)^{−m−1} (e^{it₀x} − Σ_{k≤m} (it₀x)^k / k!)`.
pub fn eval_tau(t0: f64, m: u32, x: f64) -> Complex64 {
    let y = t0 * x;
    let mf = factorial(m);
    if y.abs() <= 2.0 + f64::from(m) {
        // τ = m! Σ_{k>m} i^{k−m−1} t₀^k x^{k−m−1} / k!, free of cancellation
        let mut term = Complex64::new(t0.powi(m as i32 + 1) / factorial(m + 1), 0.0);
        let mut sum = term;
        let mut k = m + 1;
        loop {
            k += 1;
            term *= I * y / f64::from(k);
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        return mf * sum;
    }
    let iy = I * y;
    let mut partial = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 0..=m {
        if k > 0 {
            term *= iy / f64::from(k);
        }
        partial += term;
    }
    let ix = I * x;
    mf * (iy.exp() - partial) / ix.powi(m as i32 + 1)
}

/// Polynomial in `θ` with complex coefficients (lowest degree first).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Poly(pub Vec<Complex64>);

impl From<Vec<[f64; 2]>> for Poly {
    fn from(v: Vec<[f64; 2]>) -> Self {
        Poly(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<Poly> for Vec<[f64; 2]> {
    fn from(p: Poly) -> Self {
        p.0.into_iter().map(|z| [z.re, z.im]).collect()
    }
}

impl Poly {
    pub const MAX_DEGREE: usize = 4;

    pub fn constant(c: Complex64) -> Self {
        Poly(vec![c])
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * theta + c)
    }

    pub fn at_zero(&self) -> Complex64 {
        self.0.first().copied().unwrap_or_default()
    }

    /// Coefficients of `θ ↦ conj(p(−θ))`.
    fn reflected_conj(&self) -> Vec<Complex64> {
        self.0
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { c.conj() } else { -c.conj() })
            .collect()
    }
}

/// One function per `(j, σ)` index, `j ∈ {0, 1}`, `σ ∈ {+, −}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexedPolys {
    pub zero_plus: Poly,
    pub zero_minus: Poly,
    pub one_plus: Poly,
    pub one_minus: Poly,
}

impl IndexedPolys {
    fn get(&self, j: usize, plus: bool) -> &Poly {
        match (j, plus) {
            (0, true) => &self.zero_plus,
            (0, false) => &self.zero_minus,
            (_, true) => &self.one_plus,
            (_, false) => &self.one_minus,
        }
    }

    fn entries(&self) -> [(&'static str, &Poly); 4] {
        [
            ("zero_plus", &self.zero_plus),
            ("zero_minus", &self.zero_minus),
            ("one_plus", &self.one_plus),
            ("one_minus", &self.one_minus),
        ]
    }
}

/// A symbol with a logarithmic singularity at `θ = 0`:
/// `ω(e^{iθ}) = Σ_{j,σ} v_{j,σ}(θ) (−ln|θ| + u_{j,σ}(θ))^{1−j−α} 1_σ(θ) χ₀(θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsLogSpec {
    pub alpha: f64,
    #[serde(default)]
    pub v: IndexedPolys,
    #[serde(default)]
    pub u: IndexedPolys,
    #[serde(default = "default_aslog_cutoff")]
    pub cutoff: (f64, f64),
    /// Declares `ω(μ̄) = conj ω(μ)`; validated against the coefficients.
    #[serde(default)]
    pub symmetric: bool,
}

fn default_aslog_cutoff() -> (f64, f64) {
    let c = CutoffPair::default();
    (c.c1, c.c2)
}

impl AsLogSpec {
    /// `v_{0,±} = v0`, all other functions zero.
    pub fn leading(alpha: f64, v0: f64) -> Self {
        AsLogSpec {
            alpha,
            v: IndexedPolys {
                zero_plus: Poly::constant(v0.into()),
                zero_minus: Poly::constant(v0.into()),
                ..Default::default()
            },
            u: IndexedPolys::default(),
            cutoff: default_aslog_cutoff(),
            symmetric: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::domain(format!("alpha = {} must be positive", self.alpha)));
        }
        let (c1, c2) = self.cutoff;
        if !(0.0 < c1 && c1 < c2 && c2 <= PI) {
            return Err(Error::domain(format!(
                "cutoff must satisfy 0 < c1 < c2 ≤ π, got ({c1}, {c2})"
            )));
        }
        for (group, polys) in [("v", &self.v), ("u", &self.u)] {
            for (name, p) in polys.entries() {
                if p.0.len() > Poly::MAX_DEGREE + 1 {
                    return Err(Error::domain(format!(
                        "{group}.{name} has degree {} > {}",
                        p.0.len() - 1,
                        Poly::MAX_DEGREE
                    )));
                }
                if p.0.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::domain(format!("{group}.{name} has non-finite coefficients")));
                }
            }
        }
        let (a, b) = (self.v.zero_plus.at_zero(), self.v.zero_minus.at_zero());
        if (a - b).norm() > 1e-12 * (1.0 + a.norm()) {
            return Err(Error::domain(format!(
                "v.zero_plus(0) = {a} must equal v.zero_minus(0) = {b}"
            )));
        }
        // the base of the complex power must stay in the right half-plane
        for j in 0..2 {
            for plus in [true, false] {
                let u = self.u.get(j, plus);
                for i in 1..=4000 {
                    let r = c2 * (i as f64 / 4000.0).powi(3);
                    let theta = if plus { r } else { -r };
                    let base = -r.ln() + u.eval(theta);
                    if !(base.re > 0.0) {
                        return Err(Error::domain(format!(
                            "-log|θ| + u.{}{}(θ) leaves the right half-plane at θ = {theta}",
                            if j == 0 { "zero" } else { "one" },
                            if plus { "_plus" } else { "_minus" }
                        )));
                    }
                }
            }
        }
        if self.symmetric {
            for (group, polys) in [("v", &self.v), ("u", &self.u)] {
                for (plus, minus, name) in [
                    (&polys.zero_plus, &polys.zero_minus, "zero"),
                    (&polys.one_plus, &polys.one_minus, "one"),
                ] {
                    let want = plus.reflected_conj();
                    let n = want.len().max(minus.0.len());
                    let get = |v: &[Complex64], k: usize| v.get(k).copied().unwrap_or_default();
                    let ok = (0..n).all(|k| (get(&want, k) - get(&minus.0, k)).norm() <= 1e-12);
                    if !ok {
                        return Err(Error::domain(format!(
                            "symmetric flag requires {group}.{name}_minus(θ) = conj({group}.{name}_plus(−θ))"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn chi(&self, theta: f64) -> f64 {
        let (c1, c2) = self.cutoff;
        1.0 - smooth_step((theta.abs() - c1) / (c2 - c1))
    }

    /// Value at `θ = 0`, where the symbol is continuous only for `α ≥ 1`.
    fn value_at_zero(&self) -> Complex64 {
        if self.alpha == 1.0 {
            self.v.zero_plus.at_zero()
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

/// Evaluates an [`AsLogSpec`] symbol at `θ ≠ 0` (folded into `(−π, π]`).
pub fn eval_aslog(spec: &AsLogSpec, theta: f64) -> Result<Complex64> {
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::domain(format!(
            "the symbol is singular at θ = 0 (got θ = {theta})"
        )));
    }
    Ok(aslog_value(spec, fold_angle(theta)))
}

fn fold_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let t = theta.rem_euclid(TAU);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

fn aslog_value(spec: &AsLogSpec, theta: f64) -> Complex64 {
    let chi = spec.chi(theta);
    if chi == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let plus = theta > 0.0;
    let log_term = -theta.abs().ln();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..2 {
        let v = spec.v.get(j, plus);
        if v.0.is_empty() {
            continue;
        }
        let base = log_term + spec.u.get(j, plus).eval(theta);
        let power = (base.ln() * (1.0 - j as f64 - spec.alpha)).exp();
        acc += v.eval(theta) * power;
    }
    acc * chi
}

/// Samples on `2^log2_len` uniform points; the sample at `θ = 0` takes the
/// limit value (0 for `α > 1`).
pub fn sample_aslog(spec: &AsLogSpec, log2_len: u32, mode: Parallelism) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let thetas = circle_angles(1 << log2_len);
    let zero = spec.value_at_zero();
    Ok(par::map_range(mode, thetas.len(), |k| {
        let t = thetas[k];
        if t == 0.0 {
            zero
        } else {
            aslog_value(spec, t)
        }
    }))
}

/// Leading coefficient `b` of `ω̂(j) ≈ b j^{−1}(ln j)^{−α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsLogCoefficient {
    pub re: f64,
    pub im: f64,
    /// Real form, present for symmetric specs.
    pub real: Option<f64>,
}

impl AsLogCoefficient {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

pub fn aslog_coefficient(spec: &AsLogSpec) -> Result<AsLogCoefficient> {
    spec.validate()?;
    let v0 = spec.v.zero_plus.at_zero();
    let two_pi_i = Complex64::new(0.0, TAU);
    let du = spec.u.zero_plus.at_zero() - spec.u.zero_minus.at_zero();
    let dv = spec.v.one_plus.at_zero() - spec.v.one_minus.at_zero();
    let b = (1.0 - spec.alpha) * v0 * (0.5 + du / two_pi_i) + dv / two_pi_i;
    let real = spec.symmetric.then(|| {
        (1.0 - spec.alpha) * v0.re * (0.5 + spec.u.zero_plus.at_zero().im / PI) + spec.v.one_plus.at_zero().im / PI
    });
    Ok(AsLogCoefficient {
        re: b.re,
        im: b.im,
        real,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierRow {
    pub j: usize,
    pub re: f64,
    pub im: f64,
    /// `ω̂(j) j (log j)^α / b`, real part.
    pub ratio: f64,
}

/// Comparison of sampled Fourier coefficients with `b j^{−1}(log j)^{−α}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierCheck {
    pub coefficient: AsLogCoefficient,
    pub samples: usize,
    pub rows: Vec<FourierRow>,
    /// Mean `|ratio − 1|` over dyadic blocks `[2^k, 2^{k+1})` of the window.
    pub dyadic: Vec<(usize, usize, f64)>,
    pub max_deviation: f64,
    pub decreasing: bool,
}

pub fn fourier_check(
    spec: &AsLogSpec,
    log2_len: u32,
    window: (usize, usize),
    mode: Parallelism,
) -> Result<FourierCheck> {
    let (lo, hi) = window;
    let len = 1usize << log2_len;
    if lo < 2 || lo > hi || 2 * hi >= len {
        return Err(Error::domain(format!(
            "check window [{lo}, {hi}] must satisfy 2 ≤ lo ≤ hi < L/2 = {}",
            len / 2
        )));
    }
    let coefficient = aslog_coefficient(spec)?;
    let b = coefficient.value();
    if b.norm() == 0.0 {
        return Err(Error::domain("leading coefficient b vanishes; nothing to compare"));
    }
    let c = fourier_coefficients(&sample_aslog(spec, log2_len, mode)?)?;
    let rows: Vec<FourierRow> = (lo..=hi)
        .map(|j| {
            let jf = j as f64;
            let r = c[j] * jf * jf.ln().powf(spec.alpha) / b;
            FourierRow {
                j,
                re: c[j].re,
                im: c[j].im,
                ratio: r.re,
            }
        })
        .collect();
    let mut dyadic = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = ((start + 1).next_power_of_two()).min(hi + 1);
        let block: Vec<f64> = rows
            .iter()
            .filter(|r| r.j >= start && r.j < end)
            .map(|r| (r.ratio - 1.0).abs())
            .collect();
        dyadic.push((start, end - 1, block.iter().sum::<f64>() / block.len() as f64));
        start = end;
    }
    let max_deviation = rows.iter().map(|r| (r.ratio - 1.0).abs()).fold(0.0, f64::max);
    let decreasing = dyadic.windows(2).all(|w| w[1].2 <= w[0].2);
    Ok(FourierCheck {
        coefficient,
        samples: len,
        rows,
        dyadic,
        max_deviation,
        decreasing,
    })
}

/// Writes `theta,re,im` rows.
pub fn write_symbol_csv<W: Write>(mut w: W, thetas: &[f64], values: &[Complex64]) -> Result<()> {
    if thetas.len() != values.len() {
        return Err(Error::domain("theta and value arrays differ in length"));
    }
    writeln!(w, "theta,re,im")?;
    for (t, z) in thetas.iter().zip(values) {
        writeln!(w, "{t:.16e},{:.16e},{:.16e}", z.re, z.im)?;
    }
    Ok(())
}

/// Image on the circle of a point on the line: `w = (x − i/2)/(x + i/2)`.
pub fn circle_point(x: f64) -> Complex64 {
    let h = Complex64::new(0.0, 0.5);
    (x - h) / (x + h)
}

/// Inverse map `x = (i/2)(1 + w)/(1 − w)`; `w = 1` corresponds to `x = ∞`.
pub fn line_point(w: Complex64) -> Result<f64> {
    let d = Complex64::new(1.0, 0.0) - w;
    if d.norm() < 1e-14 {
        return Err(Error::domain("w = 1 maps to x = ∞"));
    }
    Ok((Complex64::new(0.0, 0.5) * (1.0 + w) / d).re)
}

/// Transports a circle symbol to the line: `𝛚(x) = −w ω(w)`, `w = circle_point(x)`.
pub fn line_symbol<F>(omega: F) -> impl Fn(f64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    move |x| {
        let w = circle_point(x);
        -w * omega(w)
    }
}

/// Inverse transport: `ω(w) = −𝛚(x)/w` with `x = line_point(w)`.
pub fn circle_symbol<G>(bold: G) -> impl Fn(Complex64) -> Result<Complex64>
where
    G: Fn(f64) -> Complex64,
{
    move |w| {
        let x = line_point(w)?;
        Ok(-bold(x) / w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelEnd {
    Zero,
    Infinity,
}

/// Result of an oscillatory integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatoryValue {
    pub re: f64,
    pub im: f64,
    pub converged: bool,
    pub error_estimate: f64,
}

impl OscillatoryValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `2i ∫₀^∞ q(t) sin(xt) dt` for the model kernels `q₀` or `q_∞`.
///
/// The integral is split at the zeros of `sin(xt)`; the tail of `q_∞` is an
/// alternating series of between-zero integrals summed with the Euler
/// transform.
pub fn eval_omega_model(which: ModelEnd, alpha: f64, x: f64, cutoffs: &CutoffPair) -> Result<OscillatoryValue> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha = {alpha} must be non-negative")));
    }
    if !x.is_finite() {
        return Err(Error::domain("x must be finite"));
    }
    cutoffs.validate()?;
    if x == 0.0 {
        return match which {
            ModelEnd::Zero => Ok(OscillatoryValue {
                re: 0.0,
                im: 0.0,
                converged: true,
                error_estimate: 0.0,
            }),
            ModelEnd::Infinity => Err(Error::domain("the model symbol at infinity is singular at x = 0")),
        };
    }
    let sign = x.signum();
    let x = x.abs();
    let (integral, converged, err) = match which {
        ModelEnd::Zero => {
            let f = |t: f64| cutoffs.q_zero(alpha, t) * (x * t).sin();
            let (v, e) = integrate_from_zero(&f, cutoffs.c2, x);
            (v, e <= 1e-10, e)
        }
        ModelEnd::Infinity => {
            let f = |t: f64| cutoffs.q_inf(alpha, t) * (x * t).sin();
            integrate_to_infinity(&f, cutoffs.big_c1, cutoffs.big_c2, x)
        }
    };
    let v = 2.0 * sign * integral;
    Ok(OscillatoryValue {
        re: 0.0,
        im: v,
        converged,
        error_estimate: 2.0 * err,
    })
}

// ∫₀^{end} f with f bounded but only logarithmically regular at 0.
fn integrate_from_zero(f: &dyn Fn(f64) -> f64, end: f64, x: f64) -> (f64, f64) {
    let mut total = 0.0;
    let mut err = 0.0;
    let breaks = zero_breaks(0.0, end, x);
    // the first panel touches the singular endpoint: refine geometrically
    let first_end = breaks[1];
    let mut hi = first_end;
    for _ in 0..1100 {
        let lo = hi * 0.5;
        let (v, e) = adaptive_gauss(f, lo, hi, 1e-15, 40);
        total += v;
        err += e;
        hi = lo;
        if v.abs() <= 1e-18 * total.abs().max(1e-300) || hi < 1e-300 {
            break;
        }
    }
    for w in breaks[1..].windows(2) {
        let (v, e) = adaptive_gauss(f, w[0], w[1], 1e-15, 40);
        total += v;
        err += e;
    }
    (total, err)
}

// Breakpoints at the zeros kπ/x inside (a, b), plus the endpoints.
fn zero_breaks(a: f64, b: f64, x: f64) -> Vec<f64> {
    let mut v = vec![a];
    let step = PI / x;
    let mut k = (a / step).floor() + 1.0;
    while k * step < b {
        v.push(k * step);
        k += 1.0;
    }
    v.push(b);
    v
}

fn integrate_to_infinity(f: &dyn Fn(f64) -> f64, start: f64, smooth_from: f64, x: f64) -> (f64, bool, f64) {
    let step = PI / x;
    let first_zero = ((smooth_from / step).ceil() * step).max(smooth_from);
    let mut breaks = zero_breaks(start, first_zero, x);
    if breaks.len() > 2 && breaks[breaks.len() - 2] == first_zero {
        breaks.pop();
    }
    let mut head = 0.0;
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let (v, e) = adaptive_gauss(f, w[0], w[1], 1e-15, 40);
        head += v;
        err += e;
    }
    // alternating tail between consecutive zeros
    const TERMS: usize = 48;
    let mut partial = Vec::with_capacity(TERMS);
    let mut s = 0.0;
    let mut a = first_zero;
    for _ in 0..TERMS {
        let (v, e) = adaptive_gauss(f, a, a + step, 1e-16, 40);
        s += v;
        err += e;
        partial.push(s);
        a += step;
    }
    let (tail, delta) = euler_average(&partial);
    let scale = (head + tail).abs().max(1e-300);
    (
        head + tail,
        delta <= 1e-9 * scale.max(1.0) && delta.is_finite(),
        err + delta,
    )
}

/// Euler transform by repeated averaging of partial sums; returns the value
/// and the change over the last averaging level.
fn euler_average(partial: &[f64]) -> (f64, f64) {
    let mut level = partial.to_vec();
    let mut prev_last = *level.last().unwrap_or(&0.0);
    let mut delta = f64::INFINITY;
    while level.len() > 1 {
        level = level.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let last = level[level.len() - 1];
        delta = (last - prev_last).abs();
        prev_last = last;
    }
    (prev_last, delta)
}

// 20-point Gauss–Legendre rule, computed once.
fn gauss_rule() -> &'static ([f64; 20], [f64; 20]) {
    use std::sync::OnceLock;
    static RULE: OnceLock<([f64; 20], [f64; 20])> = OnceLock::new();
    RULE.get_or_init(legendre_rule::<20>)
}

fn gauss_rule_10() -> &'static ([f64; 10], [f64; 10]) {
    use std::sync::OnceLock;
    static RULE: OnceLock<([f64; 10], [f64; 10])> = OnceLock::new();
    RULE.get_or_init(legendre_rule::<10>)
}

fn legendre_rule<const N: usize>() -> ([f64; N], [f64; N]) {
    let mut nodes = [0.0; N];
    let mut weights = [0.0; N];
    let n = N as f64;
    for i in 0..N {
        let mut z = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=N {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (nodes, weights)
}

fn gauss_apply<const N: usize>(rule: &([f64; N], [f64; N]), f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    rule.0.iter().zip(&rule.1).map(|(z, w)| w * f(c + h * z)).sum::<f64>() * h
}

/// Adaptive bisection driven by the 10- vs 20-point Gauss–Legendre gap.
fn adaptive_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
    let fine = gauss_apply(gauss_rule(), f, a, b);
    let coarse = gauss_apply(gauss_rule_10(), f, a, b);
    let err = (fine - coarse).abs();
    if err <= tol.max(1e-15 * fine.abs()) || depth == 0 || (b - a) < 1e-14 * a.abs().max(1e-300) {
        return (fine, err);
    }
    let m = 0.5 * (a + b);
    let (l, el) = adaptive_gauss(f, a, m, 0.5 * tol, depth - 1);
    let (r, er) = adaptive_gauss(f, m, b, 0.5 * tol, depth - 1);
    (l + r, el + er)
}
