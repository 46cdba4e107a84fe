//! Extreme eigenvalues of symmetric operators.
//!
//! Small problems go through a dense symmetric eigendecomposition. Large
//! Hankel truncations use a thick-restart Lanczos iteration with full
//! reorthogonalization that resolves both spectral ends from one Krylov
//! basis.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{HankelTruncation, DEFAULT_DENSE_LIMIT};
use crate::par::{self, Parallelism};

/// Eigenvalues within `SIGN_BAND · ‖A‖` of zero are dropped.
pub const SIGN_BAND: f64 = 1e-13;

/// A symmetric linear operator on `R^dim`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for HankelTruncation {
    fn dim(&self) -> usize {
        self.order()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_into(x, y);
    }
}

/// A dense symmetric matrix applied column by column.
pub struct DenseOperator<'a> {
    matrix: &'a DMatrix<f64>,
    mode: Parallelism,
}

impl<'a> DenseOperator<'a> {
    pub fn new(matrix: &'a DMatrix<f64>, mode: Parallelism) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::domain("dense operator must be square"));
        }
        Ok(DenseOperator { matrix, mode })
    }
}

impl LinearOperator for DenseOperator<'_> {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        // symmetric: row i equals column i, which is contiguous
        let m = self.matrix;
        par::fill_indexed(self.mode, y, |i| par::dot(m.column(i).as_slice(), x));
    }
}

/// Wraps a closure `y = A x` of a given dimension.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnOperator { dim, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

/// Extreme eigenvalues split by sign, each list non-increasing:
/// `lambda_plus[n-1] = λ_n⁺(A)`, `lambda_minus[n-1] = λ_n⁺(−A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub lambda_plus: Vec<f64>,
    pub lambda_minus: Vec<f64>,
    pub residuals_plus: Vec<f64>,
    pub residuals_minus: Vec<f64>,
    /// Dimension of the operator.
    pub order: usize,
    pub solver_id: String,
    pub seed: u64,
    /// Whether every requested eigenvalue met the tolerance.
    pub converged: bool,
    /// Number of extreme eigenvalues resolved at each end. Entries of a list
    /// shorter than this fell inside the zero band and count as 0.
    pub certified: usize,
    /// Resolved eigenvalues dropped for lying inside the zero band.
    pub dropped: usize,
    pub tol: f64,
    pub matvecs: usize,
    pub norm_estimate: f64,
}

impl SpectrumResult {
    /// `λ_n⁺` (1-based), or 0 when `n` is certified but fell in the zero band.
    pub fn plus(&self, n: usize) -> Option<f64> {
        lookup(&self.lambda_plus, self.certified, n)
    }

    pub fn minus(&self, n: usize) -> Option<f64> {
        lookup(&self.lambda_minus, self.certified, n)
    }

    /// Merged non-increasing union of both lists (the singular values).
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.lambda_plus.iter().chain(&self.lambda_minus).copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Synthetic result with exact values, for tests and injected studies.
    pub fn from_values(mut lambda_plus: Vec<f64>, mut lambda_minus: Vec<f64>, solver_id: &str) -> Self {
        lambda_plus.retain(|&x| x > 0.0);
        lambda_minus.retain(|&x| x > 0.0);
        lambda_plus.sort_by(|a, b| b.total_cmp(a));
        lambda_minus.sort_by(|a, b| b.total_cmp(a));
        let certified = lambda_plus.len().max(lambda_minus.len());
        SpectrumResult {
            residuals_plus: vec![0.0; lambda_plus.len()],
            residuals_minus: vec![0.0; lambda_minus.len()],
            order: certified,
            lambda_plus,
            lambda_minus,
            solver_id: solver_id.into(),
            seed: 0,
            converged: true,
            certified,
            dropped: 0,
            tol: 0.0,
            matvecs: 0,
            norm_estimate: 0.0,
        }
    }
}

fn lookup(list: &[f64], certified: usize, n: usize) -> Option<f64> {
    if n == 0 {
        return None;
    }
    match list.get(n - 1) {
        Some(&x) => Some(x),
        None if n <= certified => Some(0.0),
        None => None,
    }
}

/// Full spectrum of a dense symmetric matrix.
pub fn dense_spectrum(a: &DMatrix<f64>) -> Result<SpectrumResult> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::domain("matrix must be square"));
    }
    if n > DEFAULT_DENSE_LIMIT {
        return Err(Error::resource(format!(
            "order {n} exceeds the dense limit {DEFAULT_DENSE_LIMIT}"
        )));
    }
    let amax = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut asym = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if asym > 1e-12 * amax {
        return Err(Error::domain(format!(
            "matrix is not symmetric (max asymmetry {asym:e} vs max entry {amax:e})"
        )));
    }
    let eig = SymmetricEigen::new(a.clone()).eigenvalues;
    let norm = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let band = SIGN_BAND * norm;
    let mut plus: Vec<f64> = eig.iter().copied().filter(|&x| x > band).collect();
    let mut minus: Vec<f64> = eig.iter().filter(|&&x| x < -band).map(|x| -x).collect();
    plus.sort_by(|a, b| b.total_cmp(a));
    minus.sort_by(|a, b| b.total_cmp(a));
    let dropped = n - plus.len() - minus.len();
    Ok(SpectrumResult {
        residuals_plus: vec![0.0; plus.len()],
        residuals_minus: vec![0.0; minus.len()],
        lambda_plus: plus,
        lambda_minus: minus,
        order: n,
        solver_id: "dense-symmetric".into(),
        seed: 0,
        converged: true,
        certified: n,
        dropped,
        tol: 0.0,
        matvecs: 0,
        norm_estimate: norm,
    })
}

/// Parameters of [`lanczos_extremes`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LanczosParams {
    /// Eigenvalues wanted at each end.
    pub k: usize,
    pub tol: f64,
    /// Budget of operator applications.
    pub max_iter: usize,
    pub seed: u64,
    /// Basis size at which the iteration restarts.
    pub max_basis: usize,
    /// Expansion steps between convergence checks.
    pub check_every: usize,
    #[serde(skip)]
    pub mode: Parallelism,
}

impl Default for LanczosParams {
    fn default() -> Self {
        LanczosParams {
            k: 10,
            tol: 1e-10,
            max_iter: 20_000,
            seed: 0,
            max_basis: 600,
            check_every: 25,
            mode: Parallelism::Sequential,
        }
    }
}

const POWER_STEPS: usize = 20;

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = par::norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

/// `‖A‖` from a few power iterations.
pub fn estimate_norm(op: &dyn LinearOperator, seed: u64) -> f64 {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut x = random_unit(n, &mut rng);
    let mut y = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..POWER_STEPS {
        op.apply(&x, &mut y);
        est = par::norm(&y);
        if est == 0.0 {
            return 0.0;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / est;
        }
    }
    est
}

struct RitzSet {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    residuals: Vec<f64>,
}

fn ritz(t: &[Vec<f64>], f_norm: f64) -> RitzSet {
    let m = t.len();
    let tm = DMatrix::from_fn(m, m, |i, j| t[i][j]);
    let eig = SymmetricEigen::new(tm);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    let residuals = (0..m).map(|c| f_norm * vectors[(m - 1, c)].abs()).collect();
    RitzSet {
        values,
        vectors,
        residuals,
    }
}

/// Extreme eigenvalues at both ends of a symmetric operator.
///
/// A Ritz pair `(θ, y)` is accepted once `‖A y − θ y‖ ≤ tol · max(|θ|, ‖A‖)`.
/// When the budget `max_iter` runs out the result carries
/// `converged = false` and only the resolved leading values of each end.
pub fn lanczos_extremes(op: &dyn LinearOperator, params: &LanczosParams) -> Result<SpectrumResult> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::domain("operator dimension must be positive"));
    }
    if params.k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if !(params.tol > 0.0) {
        return Err(Error::domain(format!("tol = {} must be positive", params.tol)));
    }
    let k = params.k.min(n);
    let max_basis = params.max_basis.min(n);
    let keep = (k + (k / 2).max(8)).min(max_basis.saturating_sub(4) / 3);
    if max_basis < n && keep < k {
        return Err(Error::resource(format!(
            "max_basis = {} is too small to resolve k = {k} eigenvalues at each end",
            params.max_basis
        )));
    }
    let mode = params.mode;
    let mut matvecs = POWER_STEPS;
    let mut norm_est = estimate_norm(op, params.seed);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut t: Vec<Vec<f64>> = Vec::new();
    let mut next = random_unit(n, &mut rng);
    let mut w = vec![0.0; n];
    let mut f_norm;
    let mut since_check = 0usize;

    loop {
        // expansion step: append `next`, then orthogonalize A·next
        basis.push(std::mem::take(&mut next));
        let m = basis.len();
        for row in t.iter_mut() {
            row.push(0.0);
        }
        t.push(vec![0.0; m]);
        op.apply(&basis[m - 1], &mut w);
        matvecs += 1;

        let mut h = par::project(mode, &basis, &w);
        par::subtract_combination(mode, &basis, &h, &mut w);
        let h2 = par::project(mode, &basis, &w);
        par::subtract_combination(mode, &basis, &h2, &mut w);
        for (a, b) in h.iter_mut().zip(&h2) {
            *a += b;
        }
        for (i, &hi) in h.iter().enumerate() {
            t[i][m - 1] = hi;
            t[m - 1][i] = hi;
        }
        f_norm = par::norm(&w);
        let scale_now = norm_est.max(h.iter().fold(0.0f64, |a, x| a.max(x.abs())));
        let breakdown = f_norm <= 1e-14 * scale_now.max(f64::MIN_POSITIVE);
        since_check += 1;

        let full = m == max_basis || m == n;
        let out_of_budget = matvecs >= params.max_iter;
        let check = full || breakdown || out_of_budget || since_check >= params.check_every;

        if check {
            since_check = 0;
            let f_eff = if breakdown { 0.0 } else { f_norm };
            let set = ritz(&t, f_eff);
            let extreme = set.values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            norm_est = norm_est.max(extreme);
            let scale = norm_est;
            let ok = |i: usize| set.residuals[i] <= params.tol * scale.max(set.values[i].abs());
            let kk = k.min(m);
            let top_ok = (0..kk).all(|c| ok(m - 1 - c));
            let bot_ok = (0..kk).all(&ok);
            let exhausted = m == n && (breakdown || f_eff <= params.tol * scale);
            if (top_ok && bot_ok && (kk == k || m == n)) || exhausted {
                return Ok(assemble(&set, kk, m, n, norm_est, params, matvecs, true, |_| true));
            }
            if out_of_budget {
                return Ok(assemble(&set, kk, m, n, norm_est, params, matvecs, false, ok));
            }
            if breakdown {
                // invariant subspace found: continue with a fresh direction
                let mut v = random_unit(n, &mut rng);
                for _ in 0..2 {
                    let c = par::project(mode, &basis, &v);
                    par::subtract_combination(mode, &basis, &c, &mut v);
                }
                let nv = par::norm(&v);
                v.iter_mut().for_each(|x| *x /= nv);
                next = v;
                continue;
            }
            if full {
                // thick restart: keep the extreme Ritz vectors of both ends
                let keep_each = keep.min(m / 2);
                let mut cols: Vec<usize> = (0..keep_each).collect();
                cols.extend((m - keep_each..m).filter(|c| *c >= keep_each));
                let mut new_basis = Vec::with_capacity(max_basis);
                for &c in &cols {
                    let coeffs: Vec<f64> = set.vectors.column(c).iter().copied().collect();
                    let mut y = vec![0.0; n];
                    par::combine(mode, &basis, &coeffs, &mut y);
                    new_basis.push(y);
                }
                basis = new_basis;
                let l = basis.len();
                t = (0..l)
                    .map(|i| {
                        let mut row = vec![0.0; l];
                        row[i] = set.values[cols[i]];
                        row
                    })
                    .collect();
                next = w.iter().map(|x| x / f_norm).collect();
                continue;
            }
        }
        if breakdown {
            let mut v = random_unit(n, &mut rng);
            for _ in 0..2 {
                let c = par::project(mode, &basis, &v);
                par::subtract_combination(mode, &basis, &c, &mut v);
            }
            let nv = par::norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            next = v;
        } else {
            next = w.iter().map(|x| x / f_norm).collect();
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    set: &RitzSet,
    kk: usize,
    m: usize,
    n: usize,
    norm_est: f64,
    params: &LanczosParams,
    matvecs: usize,
    converged: bool,
    ok: impl Fn(usize) -> bool,
) -> SpectrumResult {
    let band = SIGN_BAND * norm_est;
    let mut plus = Vec::new();
    let mut res_plus = Vec::new();
    let mut minus = Vec::new();
    let mut res_minus = Vec::new();
    let mut dropped = 0;
    // when the whole space is spanned every Ritz value is an eigenvalue
    let take = if m == n { m } else { kk };
    let mut top_prefix = 0;
    for c in 0..take {
        let i = m - 1 - c;
        if !ok(i) {
            break;
        }
        top_prefix += 1;
        let v = set.values[i];
        if v > band {
            plus.push(v);
            res_plus.push(set.residuals[i]);
        }
    }
    let mut bot_prefix = 0;
    for i in 0..take {
        if !ok(i) {
            break;
        }
        bot_prefix += 1;
        let v = set.values[i];
        if v < -band {
            minus.push(-v);
            res_minus.push(set.residuals[i]);
        }
    }
    if m == n {
        dropped = set.values.iter().filter(|v| v.abs() <= band).count();
    } else {
        dropped += set.values[m - top_prefix..].iter().filter(|v| v.abs() <= band).count();
        dropped += set.values[..bot_prefix].iter().filter(|v| v.abs() <= band).count();
    }
    SpectrumResult {
        lambda_plus: plus,
        lambda_minus: minus,
        residuals_plus: res_plus,
        residuals_minus: res_minus,
        order: n,
        solver_id: "lanczos-thick-restart".into(),
        seed: params.seed,
        converged,
        certified: if m == n { n } else { top_prefix.min(bot_prefix) },
        dropped,
        tol: params.tol,
        matvecs,
        norm_estimate: norm_est,
    }
}

/// Counts of eigenvalues exceeding `lambda`: `(n₊, n₋, n₊ + n₋)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n: usize,
}

pub fn counting(s: &SpectrumResult, lambda: f64) -> Result<Counts> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("lambda = {lambda} must be positive")));
    }
    let n_plus = s.lambda_plus.iter().filter(|&&x| x > lambda).count();
    let n_minus = s.lambda_minus.iter().filter(|&&x| x > lambda).count();
    Ok(Counts {
        n_plus,
        n_minus,
        n: n_plus + n_minus,
    })
}

/// Extremes of `n · λ_n^p` over a window: the finite-n proxies of the
/// lim sup / lim inf functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaProxy {
    pub sup_plus: Option<f64>,
    pub inf_plus: Option<f64>,
    pub sup_minus: Option<f64>,
    pub inf_minus: Option<f64>,
    pub sup_s: f64,
    pub inf_s: f64,
}

fn extremes(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, x| match acc {
        None => Some((x, x)),
        Some((hi, lo)) => Some((hi.max(x), lo.min(x))),
    })
}

pub fn delta_p_proxy(s: &SpectrumResult, p: f64, window: std::ops::RangeInclusive<usize>) -> Result<DeltaProxy> {
    if !(p > 0.0) {
        return Err(Error::domain(format!("p = {p} must be positive")));
    }
    let (lo, hi) = (*window.start(), *window.end());
    if lo == 0 || lo > hi {
        return Err(Error::domain(format!(
            "window {lo}..={hi} is empty (indices are 1-based)"
        )));
    }
    let sv = s.singular_values();
    if hi > sv.len() {
        return Err(Error::domain(format!(
            "window end {hi} exceeds the {} available eigenvalues",
            sv.len()
        )));
    }
    let scaled = |list: &[f64]| extremes((lo..=hi.min(list.len())).map(|n| n as f64 * list[n - 1].powf(p)));
    let plus = scaled(&s.lambda_plus);
    let minus = scaled(&s.lambda_minus);
    let (sup_s, inf_s) = scaled(&sv).expect("window checked against merged list");
    Ok(DeltaProxy {
        sup_plus: plus.map(|x| x.0),
        inf_plus: plus.map(|x| x.1),
        sup_minus: minus.map(|x| x.0),
        inf_minus: minus.map(|x| x.1),
        sup_s,
        inf_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize) -> HankelTruncation {
        HankelTruncation::new((0..2 * n - 1).map(|k| 1.0 / (k as f64 + 1.0)).collect(), 1.0, "hilbert").unwrap()
    }

    #[test]
    fn dense_examples() {
        let s = dense_spectrum(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((s.lambda_plus[0] - 1.0).abs() < 1e-15 && (s.lambda_minus[0] - 1.0).abs() < 1e-15);
        let s = dense_spectrum(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0])).unwrap();
        assert_eq!(s.lambda_plus, vec![2.0]);
        assert_eq!(s.lambda_minus, vec![3.0]);
        let s = dense_spectrum(&hilbert(5).dense_matrix().unwrap()).unwrap();
        assert!((s.lambda_plus[0] - 1.567_050_7).abs() < 5e-8);
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(dense_spectrum(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn lanczos_matches_dense_on_hilbert() {
        let h = hilbert(1024);
        let dense = dense_spectrum(&h.dense_matrix().unwrap()).unwrap();
        let params = LanczosParams {
            k: 10,
            ..Default::default()
        };
        let lz = lanczos_extremes(&h, &params).unwrap();
        assert!(lz.converged);
        for i in 0..10 {
            let (a, b) = (lz.lambda_plus[i], dense.lambda_plus[i]);
            assert!((a - b).abs() <= 1e-10 * b, "i={i}: {a} vs {b}");
        }
    }

    #[test]
    fn lanczos_small_and_zero_operators() {
        let swap = FnOperator::new(2, |x: &[f64], y: &mut [f64]| {
            y[0] = x[1];
            y[1] = x[0];
        });
        let s = lanczos_extremes(
            &swap,
            &LanczosParams {
                k: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((s.lambda_plus[0] - 1.0).abs() < 1e-14);
        assert!((s.lambda_minus[0] - 1.0).abs() < 1e-14);

        let zero = FnOperator::new(50, |_: &[f64], y: &mut [f64]| y.iter_mut().for_each(|v| *v = 0.0));
        let s = lanczos_extremes(
            &zero,
            &LanczosParams {
                k: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(s.converged);
        assert!(s.lambda_plus.is_empty() && s.lambda_minus.is_empty());
    }

    #[test]
    fn lanczos_restarts_and_flags_budget() {
        // diagonal with a slowly decaying spectrum of both signs
        let n = 3000;
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let x = 1.0 / (1.0 + (i / 2) as f64);
                if i % 2 == 0 {
                    x
                } else {
                    -0.7 * x
                }
            })
            .collect();
        let op = FnOperator::new(n, |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = diag[i] * x[i];
            }
        });
        let params = LanczosParams {
            k: 5,
            max_basis: 60,
            ..Default::default()
        };
        let s = lanczos_extremes(&op, &params).unwrap();
        assert!(s.converged, "{s:?}");
        for i in 0..5 {
            assert!((s.lambda_plus[i] - 1.0 / (1.0 + i as f64)).abs() < 1e-9);
            assert!((s.lambda_minus[i] - 0.7 / (1.0 + i as f64)).abs() < 1e-9);
        }

        let starved = LanczosParams {
            k: 5,
            max_basis: 60,
            max_iter: 40,
            ..Default::default()
        };
        let s = lanczos_extremes(&op, &starved).unwrap();
        assert!(!s.converged);
        assert!(s.lambda_plus.len() <= 5 && s.certified < 5);
    }

    #[test]
    fn lanczos_is_deterministic_and_mode_independent() {
        let h = hilbert(5000);
        let p = LanczosParams {
            k: 6,
            seed: 42,
            ..Default::default()
        };
        let a = lanczos_extremes(&h, &p).unwrap();
        let b = lanczos_extremes(&h, &p).unwrap();
        assert_eq!(a, b);
        let c = lanczos_extremes(
            &h,
            &LanczosParams {
                mode: Parallelism::Rayon,
                ..p
            },
        )
        .unwrap();
        assert_eq!(a.lambda_plus, c.lambda_plus);
    }

    #[test]
    fn counting_examples() {
        let s = SpectrumResult::from_values(vec![3.0, 2.0, 1.0], vec![1.0], "t");
        assert_eq!(
            counting(&s, 1.5).unwrap(),
            Counts {
                n_plus: 2,
                n_minus: 0,
                n: 2
            }
        );
        assert_eq!(
            counting(&s, 0.5).unwrap(),
            Counts {
                n_plus: 3,
                n_minus: 1,
                n: 4
            }
        );
        let e = SpectrumResult::from_values(vec![], vec![], "e");
        assert_eq!(counting(&e, 0.1).unwrap().n, 0);
        assert!(counting(&s, 0.0).is_err());
    }

    #[test]
    #[allow(clippy::reversed_empty_ranges)]
    fn delta_proxy_examples() {
        let lp: Vec<f64> = (1..=50).map(|n| 1.0 / n as f64).collect();
        let s = SpectrumResult::from_values(lp, vec![], "t");
        let d = delta_p_proxy(&s, 1.0, 3..=40).unwrap();
        assert!((d.sup_plus.unwrap() - 1.0).abs() < 1e-14 && (d.inf_plus.unwrap() - 1.0).abs() < 1e-14);

        let s = SpectrumResult::from_values(vec![1.0, 0.5], vec![0.75], "t");
        let d = delta_p_proxy(&s, 1.0, 1..=3).unwrap();
        assert_eq!(d.sup_s, 1.5);
        assert_eq!(d.inf_s, 1.0);

        let e = SpectrumResult::from_values(vec![], vec![], "e");
        assert!(delta_p_proxy(&e, 1.0, 1..=1).is_err());
        assert!(delta_p_proxy(&s, 1.0, 2..=1).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};

        fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
            let mut m = DMatrix::zeros(n, n);
            for j in 0..n {
                for i in 0..=j {
                    let x = rng.random_range(-1.0..1.0);
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
            }
            m
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn weyl_inequality(seed in any::<u64>(), n in 2usize..40, l1 in 0.01f64..3.0, l2 in 0.01f64..3.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_symmetric(n, &mut rng);
                let b = random_symmetric(n, &mut rng);
                let sa = dense_spectrum(&a).unwrap();
                let sb = dense_spectrum(&b).unwrap();
                let sab = dense_spectrum(&(&a + &b)).unwrap();
                let lhs = counting(&sab, l1 + l2).unwrap().n_plus;
                let rhs = counting(&sa, l1).unwrap().n_plus + counting(&sb, l2).unwrap().n_plus;
                prop_assert!(lhs <= rhs);
            }

            #[test]
            fn counting_identity(seed in any::<u64>(), n in 2usize..40, lambda in 0.001f64..4.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = dense_spectrum(&random_symmetric(n, &mut rng)).unwrap();
                let c = counting(&s, lambda).unwrap();
                prop_assert_eq!(c.n, c.n_plus + c.n_minus);
                let merged = s.singular_values().iter().filter(|&&x| x > lambda).count();
                prop_assert_eq!(c.n, merged);
            }
        }
    }
}
