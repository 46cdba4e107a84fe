//! Build-and-solve entry points shared by the analysis routines and the CLI.

use crate::eigensolve::{dense_spectrum, lanczos_extremes, LanczosParams, SpectrumResult};
use crate::error::Result;
use crate::hankel::{build_discrete, HankelTruncation};
use crate::model::{ContinuousKernelSpec, DiscreteSymbolSpec};
use crate::quadrature::{grid_spectrum, GridKind, GridSpec};

/// Orders up to this size are solved densely.
pub const DENSE_SOLVE_LIMIT: usize = 512;

/// Extreme eigenvalues of a Hankel truncation: dense for small orders,
/// Lanczos otherwise.
pub fn solve_truncation(h: &HankelTruncation, params: &LanczosParams) -> Result<SpectrumResult> {
    if h.order() <= DENSE_SOLVE_LIMIT {
        let mut s = dense_spectrum(&h.dense_matrix()?)?;
        s.seed = params.seed;
        return Ok(s);
    }
    lanczos_extremes(h, params)
}

/// Spectrum of the `N × N` truncation of a discrete model sequence.
pub fn discrete_spectrum(spec: &DiscreteSymbolSpec, n: usize, params: &LanczosParams) -> Result<SpectrumResult> {
    let h = build_discrete(spec, n)?;
    solve_truncation(&h, params)
}

/// Spectrum of a kernel discretized on `grid`.
pub fn continuous_spectrum(
    spec: &ContinuousKernelSpec,
    grid: &GridSpec,
    params: &LanczosParams,
) -> Result<SpectrumResult> {
    spec.validate()?;
    grid.validate()?;
    match grid.kind {
        GridKind::Uniform => {
            let h = crate::quadrature::build_uniform(spec, grid.t_max, grid.points)?;
            solve_truncation(&h, params)
        }
        GridKind::Geometric => grid_spectrum(spec, grid, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_and_lanczos_paths_agree() {
        let spec = DiscreteSymbolSpec::new(1.0)
            .with_b_plus1(1.0)
            .with_oscillation(1.0, 0.3, 0.5);
        let params = LanczosParams {
            k: 8,
            ..Default::default()
        };
        let dense = discrete_spectrum(&spec, 400, &params).unwrap();
        let h = build_discrete(&spec, 400).unwrap();
        let lanczos = lanczos_extremes(&h, &params).unwrap();
        for n in 1..=8 {
            let (a, b) = (dense.plus(n).unwrap(), lanczos.plus(n).unwrap());
            assert!((a - b).abs() <= 1e-9 * a, "n={n}");
            let (a, b) = (dense.minus(n).unwrap(), lanczos.minus(n).unwrap());
            assert!((a - b).abs() <= 1e-9 * dense.lambda_plus[0], "n={n}");
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = DiscreteSymbolSpec::new(-1.0).with_b_plus1(1.0);
        assert!(discrete_spectrum(&bad, 64, &LanczosParams::default()).is_err());
        let kernel = ContinuousKernelSpec::new(1.0).with_b_zero(1.0);
        assert!(continuous_spectrum(&kernel, &GridSpec::uniform(10.0, 64), &LanczosParams::default()).is_err());
    }
}
