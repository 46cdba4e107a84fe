use std::path::{Path, PathBuf};

use hankel_spectra::analysis::FitModel;
use hankel_spectra::eigensolve::LanczosParams;
use hankel_spectra::quadrature::GridSpec;
use hankel_spectra::symbols::AsLogSpec;
use hankel_spectra::{ContinuousKernelSpec, DiscreteSymbolSpec};
use serde::Deserialize;

use crate::Failure;

/// One scenario per file.
#[derive(Debug, Clone, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(flatten)]
    pub scenario: Scenario,
    #[serde(default)]
    pub solver: LanczosParams,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub outputs: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scenario {
    Discrete {
        spec: DiscreteSymbolSpec,
        #[serde(default)]
        n_list: Vec<usize>,
    },
    Continuous {
        spec: ContinuousKernelSpec,
        #[serde(default)]
        grids: Vec<GridSpec>,
    },
    Symbol {
        spec: AsLogSpec,
        #[serde(default = "default_log2_samples")]
        log2_samples: u32,
        #[serde(default = "default_check_window")]
        check_window: (usize, usize),
    },
}

fn default_log2_samples() -> u32 {
    20
}

fn default_check_window() -> (usize, usize) {
    (512, 4096)
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub window: (usize, usize),
    pub model: FitModel,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            window: (8, 32),
            model: FitModel::Plain,
        }
    }
}

const COMMON_KEYS: [&str; 5] = ["name", "kind", "solver", "fit", "outputs"];

fn allowed_keys(kind: &str) -> &'static [&'static str] {
    match kind {
        "discrete" => &["spec", "n_list"],
        "continuous" => &["spec", "grids"],
        "symbol" => &["spec", "log2_samples", "check_window"],
        _ => &[],
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Failure::Validation(m) => Failure::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Failure::Validation(format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Failure::Validation("config must be a JSON object".into()))?;
        let kind = obj.get("kind").and_then(|k| k.as_str()).unwrap_or("");
        let extra = allowed_keys(kind);
        for key in obj.keys() {
            if !COMMON_KEYS.contains(&key.as_str()) && !extra.contains(&key.as_str()) {
                return Err(Failure::Validation(format!("unknown field `{key}` for kind `{kind}`")));
            }
        }
        let cfg: ScenarioConfig =
            serde_json::from_value(value).map_err(|e| Failure::Validation(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let invalid = |field: &str, e: hankel_spectra::Error| Failure::Validation(format!("{field}: {e}"));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Failure::Validation(format!(
                "name `{}` must be a non-empty file name",
                self.name
            )));
        }
        let (lo, hi) = self.fit.window;
        if lo == 0 || lo > hi {
            return Err(Failure::Validation(format!(
                "fit.window = [{lo}, {hi}] must satisfy 1 ≤ lo ≤ hi"
            )));
        }
        if self.solver.k == 0 || !(self.solver.tol > 0.0) {
            return Err(Failure::Validation(
                "solver.k must be positive and solver.tol > 0".into(),
            ));
        }
        match &self.scenario {
            Scenario::Discrete { spec, n_list } => {
                spec.validate().map_err(|e| invalid("spec", e))?;
                if let Some(&n) = n_list.iter().find(|&&n| n < 2) {
                    return Err(Failure::Validation(format!("n_list entry {n} must be at least 2")));
                }
                if n_list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Failure::Validation(format!(
                        "n_list {n_list:?} must be strictly increasing"
                    )));
                }
            }
            Scenario::Continuous { spec, grids } => {
                spec.validate().map_err(|e| invalid("spec", e))?;
                for (i, g) in grids.iter().enumerate() {
                    g.validate().map_err(|e| invalid(&format!("grids[{i}]"), e))?;
                }
            }
            Scenario::Symbol {
                spec,
                log2_samples,
                check_window,
            } => {
                spec.validate().map_err(|e| invalid("spec", e))?;
                if !(4..=26).contains(log2_samples) {
                    return Err(Failure::Validation(format!(
                        "log2_samples = {log2_samples} must lie in [4, 26]"
                    )));
                }
                let (lo, hi) = *check_window;
                if lo < 2 || lo > hi || 2 * hi >= 1usize << log2_samples {
                    return Err(Failure::Validation(format!(
                        "check_window = [{lo}, {hi}] must satisfy 2 ≤ lo ≤ hi < 2^(log2_samples-1)"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        match self.scenario {
            Scenario::Discrete { .. } => "discrete",
            Scenario::Continuous { .. } => "continuous",
            Scenario::Symbol { .. } => "symbol",
        }
    }

    /// Solver parameters with `k` widened to cover the fit window.
    pub fn effective_solver(&self) -> LanczosParams {
        LanczosParams {
            k: self.solver.k.max(self.fit.window.1 + 8),
            ..self.solver
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_discrete() {
        let cfg = ScenarioConfig::parse(
            r#"{"name":"b1","kind":"discrete","spec":{"alpha":1,"b_plus1":1},"n_list":[1024],"solver":{"k":40,"seed":3}}"#,
        )
        .unwrap();
        assert_eq!(cfg.kind(), "discrete");
        assert_eq!(cfg.solver.seed, 3);
        assert_eq!(cfg.fit.window, (8, 32));
        assert_eq!(cfg.effective_solver().k, 40);
    }

    #[test]
    fn rejects_bad_fields() {
        let err = |t: &str| match ScenarioConfig::parse(t) {
            Err(Failure::Validation(m)) => m,
            other => panic!("expected validation failure, got {other:?}"),
        };
        let m = err(
            r#"{"name":"x","kind":"discrete","spec":{"alpha":1,"oscillations":[{"phi":3.141592653589793,"b":1}]}}"#,
        );
        assert!(m.contains("open interval"), "{m}");
        let m = err(r#"{"name":"x","kind":"discrete","spec":{"alpha":1},"grids":[]}"#);
        assert!(m.contains("`grids`"), "{m}");
        let m = err(r#"{"name":"x","kind":"discrete","spec":{"alpha":1,"b_plus":1}}"#);
        assert!(m.contains("b_plus"), "{m}");
        let m = err(r#"{"name":"x","kind":"discrete","spec":{"alpha":1},"n_list":[64,32]}"#);
        assert!(m.contains("increasing"), "{m}");
        err(r#"{"name":"x","kind":"wavelet","spec":{}}"#);
    }
}
