//! Nyström discretizations of integral Hankel operators
//! `(𝚪(𝐡)u)(t) = ∫₀^∞ 𝐡(t+s) u(s) ds`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{lanczos_extremes, DenseOperator, LanczosParams, SpectrumResult};
use crate::error::{Error, Result};
use crate::hankel::{HankelTruncation, DEFAULT_DENSE_LIMIT};
use crate::model::ContinuousKernelSpec;
use crate::par::{self, Parallelism};
use crate::sequences::kernel_value;

/// A real kernel on `(0, ∞)`.
pub trait Kernel: Sync {
    fn eval(&self, t: f64) -> f64;

    fn describe(&self) -> String {
        "kernel".into()
    }
}

impl Kernel for ContinuousKernelSpec {
    fn eval(&self, t: f64) -> f64 {
        kernel_value(self, t)
    }

    fn describe(&self) -> String {
        format!("continuous spec alpha={}", self.alpha)
    }
}

/// Adapts a closure into a [`Kernel`].
pub struct FnKernel<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> Kernel for FnKernel<F> {
    fn eval(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Uniform,
    Geometric,
}

/// Quadrature grid. Uniform grids start at 0 and ignore `t_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub kind: GridKind,
    #[serde(default)]
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn uniform(t_max: f64, points: usize) -> Self {
        GridSpec {
            kind: GridKind::Uniform,
            t_min: 0.0,
            t_max,
            points,
        }
    }

    pub fn geometric(t_min: f64, t_max: f64, points: usize) -> Self {
        GridSpec {
            kind: GridKind::Geometric,
            t_min,
            t_max,
            points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 16 {
            return Err(Error::domain(format!(
                "grid points = {} must be at least 16",
                self.points
            )));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::domain(format!("grid t_max = {} must be positive", self.t_max)));
        }
        if self.kind == GridKind::Geometric && !(self.t_min > 0.0 && self.t_min < self.t_max) {
            return Err(Error::domain(format!(
                "geometric grid needs 0 < t_min < t_max, got t_min={}, t_max={}",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self.kind {
            GridKind::Uniform => format!("uniform T={} M={}", self.t_max, self.points),
            GridKind::Geometric => {
                format!("geometric [{:e}, {}] M={}", self.t_min, self.t_max, self.points)
            }
        }
    }
}

/// Midpoint-rule discretization on `[0, T]` with `M` nodes.
///
/// Nodes `t_i = (i + ½) w` with `w = T/M` satisfy `t_i + t_j = (i + j + 1) w`,
/// so the weighted matrix `w 𝐡((i+j+1) w)` is itself a Hankel truncation.
pub fn build_uniform_kernel(kernel: &dyn Kernel, t_max: f64, points: usize) -> Result<HankelTruncation> {
    GridSpec::uniform(t_max, points).validate()?;
    let w = t_max / points as f64;
    let entries: Vec<f64> = (0..2 * points - 1)
        .map(|k| w * kernel.eval((k as f64 + 1.0) * w))
        .collect();
    HankelTruncation::new(
        entries,
        1.0,
        format!("{} on uniform T={t_max} M={points}", kernel.describe()),
    )
}

/// [`build_uniform_kernel`] for a spec; the `t → 0` singularity (`b_zero ≠ 0`)
/// needs [`build_graded`] instead.
pub fn build_uniform(spec: &ContinuousKernelSpec, t_max: f64, points: usize) -> Result<HankelTruncation> {
    spec.validate()?;
    if spec.b_zero != 0.0 {
        return Err(Error::domain(
            "uniform grids cannot resolve the t→0 singularity (b_zero ≠ 0); use build_graded",
        ));
    }
    build_uniform_kernel(spec, t_max, points)
}

/// Geometric nodes (midpoints in `log t`) and their weights.
pub fn geometric_nodes(grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    grid.validate()?;
    if grid.kind != GridKind::Geometric {
        return Err(Error::domain("geometric_nodes needs a geometric grid"));
    }
    let m = grid.points;
    let span = (grid.t_max / grid.t_min).ln();
    let step = span / m as f64;
    let nodes: Vec<f64> = (0..m).map(|i| grid.t_min * ((i as f64 + 0.5) * step).exp()).collect();
    let weights = nodes.iter().map(|t| t * step).collect();
    Ok((nodes, weights))
}

/// Symmetrized Nyström matrix `√(w_i w_j) 𝐡(t_i + t_j)` on a geometric grid.
pub fn build_graded(kernel: &dyn Kernel, grid: &GridSpec, mode: Parallelism) -> Result<DMatrix<f64>> {
    if grid.kind != GridKind::Geometric {
        return Err(Error::domain("build_graded needs a geometric grid"));
    }
    grid.validate()?;
    if grid.points > DEFAULT_DENSE_LIMIT {
        return Err(Error::resource(format!(
            "grid of {} points exceeds the dense limit {DEFAULT_DENSE_LIMIT}",
            grid.points
        )));
    }
    let (nodes, weights) = geometric_nodes(grid)?;
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let m = grid.points;
    let columns = par::map_range(mode, m, |j| {
        (0..m)
            .map(|i| sw[i] * sw[j] * kernel.eval(nodes[i] + nodes[j]))
            .collect::<Vec<f64>>()
    });
    Ok(DMatrix::from_vec(m, m, columns.concat()))
}

/// Extreme eigenvalues of the discretization on `grid`.
pub fn grid_spectrum(kernel: &dyn Kernel, grid: &GridSpec, params: &LanczosParams) -> Result<SpectrumResult> {
    match grid.kind {
        GridKind::Uniform => {
            let h = build_uniform_kernel(kernel, grid.t_max, grid.points)?;
            lanczos_extremes(&h, params)
        }
        GridKind::Geometric => {
            let a = build_graded(kernel, grid, params.mode)?;
            let op = DenseOperator::new(&a, params.mode)?;
            lanczos_extremes(&op, params)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub grid: GridSpec,
    pub lambda_plus: Vec<f64>,
    pub lambda_minus: Vec<f64>,
    pub converged: bool,
}

/// Eigenvalues over an index window across successively refined grids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub window: (usize, usize),
    pub rows: Vec<GridRow>,
    /// Max relative change of `λ_n^±` over the window between grid `i` and `i+1`.
    pub changes: Vec<f64>,
}

pub fn convergence_report(
    kernel: &dyn Kernel,
    grids: &[GridSpec],
    window: std::ops::RangeInclusive<usize>,
    params: &LanczosParams,
) -> Result<ConvergenceReport> {
    if grids.len() < 2 {
        return Err(Error::domain("convergence_report needs at least two grids"));
    }
    let (lo, hi) = (*window.start(), *window.end());
    if lo == 0 || lo > hi {
        return Err(Error::domain(format!(
            "window {lo}..={hi} is empty (indices are 1-based)"
        )));
    }
    let params = LanczosParams {
        k: params.k.max(hi + 4),
        ..*params
    };
    let mut rows = Vec::with_capacity(grids.len());
    for g in grids {
        let s = grid_spectrum(kernel, g, &params)?;
        let pick = |f: &dyn Fn(usize) -> Option<f64>| (lo..=hi).map(|n| f(n).unwrap_or(0.0)).collect();
        rows.push(GridRow {
            grid: *g,
            lambda_plus: pick(&|n| s.plus(n)),
            lambda_minus: pick(&|n| s.minus(n)),
            converged: s.converged,
        });
    }
    let changes = rows
        .windows(2)
        .map(|w| {
            let a = w[0].lambda_plus.iter().chain(&w[0].lambda_minus);
            let b = w[1].lambda_plus.iter().chain(&w[1].lambda_minus);
            a.zip(b)
                .map(|(x, y)| {
                    let d = (x - y).abs();
                    if d == 0.0 {
                        0.0
                    } else {
                        d / y.abs().max(x.abs())
                    }
                })
                .fold(0.0f64, f64::max)
        })
        .collect();
    Ok(ConvergenceReport {
        window: (lo, hi),
        rows,
        changes,
    })
}

/// Domain truncation chosen for a kernel's `t → ∞` tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPolicy {
    pub t_max: f64,
    /// Envelope bound on `∫_T^∞ |𝐡|` (infinite when it diverges).
    pub tail_mass: f64,
    /// Target: `tail_mass ≤ ratio · eigenvalue_scale`.
    pub target: f64,
    pub meets_target: bool,
}

/// Largest `T` a uniform grid of `points` nodes can take while sampling
/// every oscillation with `nodes_per_period` nodes.
pub fn resolution_cap(spec: &ContinuousKernelSpec, points: usize, nodes_per_period: f64) -> f64 {
    let rho = spec.oscillations.iter().fold(0.0f64, |m, o| m.max(o.rho));
    if rho == 0.0 {
        return f64::INFINITY;
    }
    points as f64 * std::f64::consts::TAU / (nodes_per_period * rho)
}

/// Picks `T` so that the neglected tail mass is at most `ratio` times
/// `eigenvalue_scale`, never beyond `t_cap`.
pub fn tail_policy(spec: &ContinuousKernelSpec, eigenvalue_scale: f64, ratio: f64, t_cap: f64) -> Result<TailPolicy> {
    spec.validate()?;
    let floor = spec
        .local_singularities
        .iter()
        .fold(spec.cutoffs.big_c2.max(1.0), |m, s| m.max(s.t0));
    let envelope = spec.b_inf.abs() + 2.0 * spec.oscillations.iter().map(|o| o.b.abs()).sum::<f64>();
    let target = ratio * eigenvalue_scale;
    let alpha = spec.alpha;
    let mass = |t: f64| -> f64 {
        if envelope == 0.0 {
            0.0
        } else if alpha > 1.0 {
            envelope * t.ln().powf(1.0 - alpha) / (alpha - 1.0)
        } else {
            f64::INFINITY
        }
    };
    let wanted = if envelope == 0.0 {
        floor
    } else if alpha > 1.0 {
        let log_t = (envelope / (target * (alpha - 1.0))).powf(1.0 / (alpha - 1.0));
        floor.max(log_t.exp())
    } else {
        f64::INFINITY
    };
    let t_max = wanted.min(t_cap).max(floor);
    let tail_mass = mass(t_max);
    Ok(TailPolicy {
        t_max,
        tail_mass,
        target,
        meets_target: tail_mass <= target * (1.0 + 1e-9),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::dense_spectrum;
    use std::f64::consts::PI;

    fn rank_one() -> FnKernel<impl Fn(f64) -> f64 + Sync> {
        FnKernel(|t: f64| (-t).exp())
    }

    fn params(k: usize) -> LanczosParams {
        LanczosParams {
            k,
            ..Default::default()
        }
    }

    #[test]
    fn uniform_rank_one_kernel() {
        let h = build_uniform_kernel(&rank_one(), 40.0, 4096).unwrap();
        let s = lanczos_extremes(&h, &params(3)).unwrap();
        assert!((s.lambda_plus[0] - 0.5).abs() < 1e-4);
        assert!(s.lambda_plus.iter().skip(1).chain(&s.lambda_minus).all(|&x| x <= 1e-8));
    }

    #[test]
    fn uniform_matrix_is_hankel() {
        let spec = ContinuousKernelSpec::new(1.0)
            .with_b_inf(1.0)
            .with_oscillation(1.0, 0.3, 0.5);
        let h = build_uniform(&spec, 30.0, 64).unwrap();
        let a = h.dense_matrix().unwrap();
        for i in 0..64 {
            for j in 0..64 {
                if i > 0 && j + 1 < 64 {
                    assert_eq!(a[(i, j)], a[(i - 1, j + 1)]);
                }
            }
        }
    }

    #[test]
    fn triangle_kernel_matches_analytic_family() {
        let tri = ContinuousKernelSpec::new(1.0).with_singularity(1.0, 0, 1.0);
        let h = build_uniform(&tri, 1.0, 4096).unwrap();
        let s = lanczos_extremes(&h, &params(12)).unwrap();
        for k in 0..=20usize {
            let exact = 1.0 / ((k as f64 + 0.5) * PI);
            let got = if k % 2 == 0 {
                s.lambda_plus[k / 2]
            } else {
                s.lambda_minus[k / 2]
            };
            assert!((got - exact).abs() <= 1e-3 * exact, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn zero_kernel_and_errors() {
        let zero = ContinuousKernelSpec::new(1.0);
        assert!(build_uniform(&zero, 1.0, 32)
            .unwrap()
            .entries()
            .iter()
            .all(|&x| x == 0.0));
        let g = GridSpec::geometric(1e-6, 1.0, 32);
        assert!(build_graded(&zero, &g, Parallelism::Sequential)
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
        let q0 = ContinuousKernelSpec::new(1.0).with_b_zero(1.0);
        assert!(matches!(build_uniform(&q0, 1.0, 64), Err(Error::Domain(_))));
        let big = GridSpec::geometric(1e-6, 1.0, DEFAULT_DENSE_LIMIT + 1);
        assert!(matches!(
            build_graded(&zero, &big, Parallelism::Sequential),
            Err(Error::Resource(_))
        ));
        assert!(GridSpec::uniform(1.0, 8).validate().is_err());
    }

    #[test]
    fn graded_rank_one_and_symmetry() {
        let g = GridSpec::geometric(1e-8, 40.0, 2048);
        let a = build_graded(&rank_one(), &g, Parallelism::Sequential).unwrap();
        assert_eq!(a, a.transpose());
        let op = DenseOperator::new(&a, Parallelism::Sequential).unwrap();
        let s = lanczos_extremes(&op, &params(3)).unwrap();
        assert!((s.lambda_plus[0] - 0.5).abs() < 1e-6, "{}", s.lambda_plus[0]);
        assert!(s.lambda_plus.iter().skip(1).chain(&s.lambda_minus).all(|&x| x <= 1e-8));
    }

    #[test]
    fn graded_q_zero_is_positive_dominated() {
        let q0 = ContinuousKernelSpec::new(1.0).with_b_zero(1.0);
        let g = GridSpec::geometric(1e-12, 1.0, 1024);
        let a = build_graded(&q0, &g, Parallelism::Rayon).unwrap();
        let s = dense_spectrum(&a).unwrap();
        let ratio = |n: usize| s.minus(n).unwrap_or(0.0) / s.plus(n).unwrap();
        assert!((1..=12).all(|n| s.plus(n).unwrap() > 0.0));
        for n in 3..=12 {
            assert!(ratio(n) < 0.05, "n={n}: ratio {}", ratio(n));
        }
        assert!(ratio(12) < 0.1 * ratio(1));
    }

    #[test]
    fn convergence_reports() {
        let grids: Vec<GridSpec> = [512, 1024, 2048]
            .iter()
            .map(|&m| GridSpec::geometric(1e-8, 40.0, m))
            .collect();
        let r = convergence_report(&rank_one(), &grids, 1..=1, &params(2)).unwrap();
        assert!(r.changes.iter().all(|&c| c <= 1e-6), "{:?}", r.changes);

        let tri = ContinuousKernelSpec::new(1.0).with_singularity(1.0, 0, 1.0);
        let grids: Vec<GridSpec> = [256, 512, 1024].iter().map(|&m| GridSpec::uniform(1.0, m)).collect();
        let r = convergence_report(&tri, &grids, 1..=8, &params(8)).unwrap();
        assert!(r.changes[1] * 2.0 <= r.changes[0], "{:?}", r.changes);

        let same = [GridSpec::uniform(1.0, 256); 2];
        let r = convergence_report(&tri, &same, 1..=4, &params(4)).unwrap();
        assert_eq!(r.changes, vec![0.0]);

        assert!(convergence_report(&tri, &same[..1], 1..=4, &params(4)).is_err());
    }

    #[test]
    fn tail_policy_cases() {
        let fast = ContinuousKernelSpec::new(4.0).with_b_inf(1.0);
        let p = tail_policy(&fast, 1e-2, 1e-4, 1e300).unwrap();
        assert!(p.meets_target);
        assert!((p.tail_mass - p.target).abs() <= 1e-9 * p.target);

        let slow = ContinuousKernelSpec::new(1.0).with_oscillation(1.0, 0.0, 1.0);
        let cap = resolution_cap(&slow, 1 << 18, 16.0);
        let p = tail_policy(&slow, 1e-2, 1e-4, cap).unwrap();
        assert!(!p.meets_target && p.tail_mass.is_infinite());
        assert_eq!(p.t_max, cap);
    }
}
