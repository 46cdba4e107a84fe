//! Deterministic CSV and JSON serialization of results.

use std::io::Write;

use serde::Serialize;

use crate::eigensolve::SpectrumResult;
use crate::error::{Error, Result};

/// Provenance attached to every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    /// Producer parameters as `(key, value)` pairs, in insertion order.
    pub parameters: Vec<(String, String)>,
}

impl ReportMeta {
    pub fn new(scenario: impl Into<String>) -> Self {
        ReportMeta {
            tool: "hankel-spectra".into(),
            version: crate::VERSION.into(),
            scenario: scenario.into(),
            parameters: Vec::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.parameters.push((key.into(), value.to_string()));
        self
    }

    /// `# key: value` lines.
    pub fn write_header<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# tool: {} {}", self.tool, self.version)?;
        writeln!(w, "# scenario: {}", self.scenario)?;
        for (k, v) in &self.parameters {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SPECTRUM_COLUMNS: &str = "n,lambda_plus,lambda_minus,scaled_plus,scaled_minus";

/// One row per index `n` with `λ_n^±` and `n^α λ_n^±`; values past the end
/// of a list are left empty.
pub fn write_spectrum_csv<W: Write>(mut w: W, meta: &ReportMeta, s: &SpectrumResult, alpha: f64) -> Result<()> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha = {alpha} must be positive")));
    }
    meta.write_header(&mut w)?;
    writeln!(w, "{SPECTRUM_COLUMNS}")?;
    let rows = s
        .lambda_plus
        .len()
        .max(s.lambda_minus.len())
        .max(s.certified.min(s.order));
    let cell = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for n in 1..=rows {
        let (lp, lm) = (s.plus(n), s.minus(n));
        let scale = (n as f64).powf(alpha);
        writeln!(
            w,
            "{n},{},{},{},{}",
            cell(lp),
            cell(lm),
            cell(lp.map(|x| x * scale)),
            cell(lm.map(|x| x * scale))
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    meta: &'a ReportMeta,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON object holding a `meta` block next to the fields of `body`.
pub fn to_json<T: Serialize>(meta: &ReportMeta, body: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { meta, body })
        .map_err(|e| Error::Io(format!("JSON serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}
