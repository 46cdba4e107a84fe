use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hankel_spectra::analysis::{fit_coefficient, symmetry_ratio, truncation_study_with, FitReport, SymmetryStats};
use hankel_spectra::eigensolve::{LanczosParams, SpectrumResult};
use hankel_spectra::model::{predict_continuous, predict_discrete};
use hankel_spectra::pipeline::{continuous_spectrum, discrete_spectrum};
use hankel_spectra::quadrature::convergence_report;
use hankel_spectra::report::{fmt_f64, to_json, write_spectrum_csv, ReportMeta};
use hankel_spectra::symbols::{aslog_coefficient, circle_angles, fourier_check, sample_aslog, write_symbol_csv};
use hankel_spectra::{AsymptoticPrediction, Parallelism};
use serde::Serialize;

use crate::config::{Scenario, ScenarioConfig};
use crate::Failure;

/// At most this many rows go into `symbol.csv`.
const SYMBOL_DUMP_ROWS: usize = 4096;

pub struct Context {
    pub out: PathBuf,
    pub mode: Parallelism,
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub converged: bool,
    pub files: Vec<PathBuf>,
}

struct Writer<'a> {
    dir: &'a Path,
    outcome: Outcome,
    summary: String,
}

impl<'a> Writer<'a> {
    fn new(dir: &'a Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Writer {
            dir,
            outcome: Outcome {
                converged: true,
                files: Vec::new(),
            },
            summary: String::new(),
        })
    }

    fn file(&mut self, name: &str, contents: &[u8]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
        self.outcome.files.push(path);
        Ok(())
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.summary.push_str(text.as_ref());
        self.summary.push('\n');
    }

    fn finish(mut self) -> Result<Outcome, Failure> {
        let text = std::mem::take(&mut self.summary);
        self.file("summary.txt", text.as_bytes())?;
        Ok(self.outcome)
    }
}

fn meta(cfg: &ScenarioConfig, params: &LanczosParams) -> ReportMeta {
    ReportMeta::new(&cfg.name)
        .with("kind", cfg.kind())
        .with("solver.k", params.k)
        .with("solver.tol", params.tol)
        .with("solver.max_iter", params.max_iter)
        .with("solver.max_basis", params.max_basis)
        .with("solver.seed", params.seed)
        .with("fit.window", format!("{}..={}", cfg.fit.window.0, cfg.fit.window.1))
        .with("fit.model", format!("{:?}", cfg.fit.model))
}

fn json<T: Serialize>(meta: &ReportMeta, body: &T) -> Result<Vec<u8>, Failure> {
    Ok(to_json(meta, body)?.into_bytes())
}

fn prediction(cfg: &ScenarioConfig) -> Result<Option<AsymptoticPrediction>, Failure> {
    Ok(match &cfg.scenario {
        Scenario::Discrete { spec, .. } => Some(predict_discrete(spec)?),
        Scenario::Continuous { spec, .. } => Some(predict_continuous(spec)?),
        Scenario::Symbol { .. } => None,
    })
}

fn alpha(cfg: &ScenarioConfig) -> f64 {
    match &cfg.scenario {
        Scenario::Discrete { spec, .. } => spec.alpha,
        Scenario::Continuous { spec, .. } => spec.alpha,
        Scenario::Symbol { spec, .. } => spec.alpha,
    }
}

fn write_prediction(
    w: &mut Writer,
    cfg: &ScenarioConfig,
    meta: &ReportMeta,
) -> Result<Option<AsymptoticPrediction>, Failure> {
    w.line(format!(
        "scenario: {} ({}, alpha = {})",
        cfg.name,
        cfg.kind(),
        alpha(cfg)
    ));
    match &cfg.scenario {
        Scenario::Symbol { spec, .. } => {
            let b = aslog_coefficient(spec)?;
            w.file("prediction.json", &json(meta, &b)?)?;
            w.line(format!("predicted coefficient: b = {} + {}i", b.re, b.im));
            Ok(None)
        }
        _ => {
            let p = prediction(cfg)?.expect("non-symbol scenario");
            w.file("prediction.json", &json(meta, &p)?)?;
            w.line(format!(
                "predicted: a+ = {}, a- = {}, a_s = {}",
                p.a_plus, p.a_minus, p.a_singular
            ));
            Ok(Some(p))
        }
    }
}

#[derive(Serialize)]
struct SolverSummary<'a> {
    order: usize,
    solver_id: &'a str,
    converged: bool,
    certified: usize,
    dropped: usize,
    matvecs: usize,
    norm_estimate: f64,
}

#[derive(Serialize)]
struct FitOutput<'a> {
    solver: SolverSummary<'a>,
    predicted_plus: Option<f64>,
    predicted_minus: Option<f64>,
    fit: &'a FitReport,
    symmetry: Option<SymmetryStats>,
}

fn write_spectrum(
    w: &mut Writer,
    cfg: &ScenarioConfig,
    meta: ReportMeta,
    s: &SpectrumResult,
    predicted: Option<&AsymptoticPrediction>,
) -> Result<(), Failure> {
    let a = alpha(cfg);
    let mut csv = Vec::new();
    write_spectrum_csv(&mut csv, &meta, s, a)?;
    w.file("spectrum.csv", &csv)?;
    let (lo, hi) = cfg.fit.window;
    w.outcome.converged &= s.converged;
    let fit = match fit_coefficient(s, a, lo..=hi, cfg.fit.model) {
        Ok(f) => f,
        Err(e) if !s.converged => {
            w.line(format!(
                "solver stopped after {} matvecs without converging; fit skipped: {e}",
                s.matvecs
            ));
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    let symmetry = symmetry_ratio(s, lo..=hi).ok();
    let out = FitOutput {
        solver: SolverSummary {
            order: s.order,
            solver_id: &s.solver_id,
            converged: s.converged,
            certified: s.certified,
            dropped: s.dropped,
            matvecs: s.matvecs,
            norm_estimate: s.norm_estimate,
        },
        predicted_plus: predicted.map(|p| p.a_plus),
        predicted_minus: predicted.map(|p| p.a_minus),
        fit: &fit,
        symmetry,
    };
    w.file("fit.json", &json(&meta, &out)?)?;
    w.line(format!(
        "solver: {} order {}, {} matvecs, converged = {}",
        s.solver_id, s.order, s.matvecs, s.converged
    ));
    w.line(format!(
        "fit ({:?}, n in [{lo}, {hi}]): a_hat+ = {}, a_hat- = {}, drift = {}",
        cfg.fit.model, fit.a_hat_plus, fit.a_hat_minus, fit.drift
    ));
    if let Some(sym) = &out.symmetry {
        w.line(format!("symmetry ratio median = {}", sym.median));
    }
    Ok(())
}

fn solve_discrete_all(cfg: &ScenarioConfig, params: &LanczosParams) -> Result<Vec<(usize, SpectrumResult)>, Failure> {
    let Scenario::Discrete { spec, n_list } = &cfg.scenario else {
        unreachable!()
    };
    n_list
        .iter()
        .map(|&n| Ok((n, discrete_spectrum(spec, n, params)?)))
        .collect()
}

fn params(cfg: &ScenarioConfig, ctx: &Context) -> LanczosParams {
    LanczosParams {
        mode: ctx.mode,
        ..cfg.effective_solver()
    }
}

pub fn predict(cfg: &ScenarioConfig, ctx: &Context) -> Result<Outcome, Failure> {
    let mut w = Writer::new(&ctx.out)?;
    let p = params(cfg, ctx);
    write_prediction(&mut w, cfg, &meta(cfg, &p))?;
    w.finish()
}

pub fn spectrum(cfg: &ScenarioConfig, ctx: &Context, order: Option<usize>) -> Result<Outcome, Failure> {
    let p = params(cfg, ctx);
    let base = meta(cfg, &p);
    let mut w = Writer::new(&ctx.out)?;
    let predicted = write_prediction(&mut w, cfg, &base)?;
    match &cfg.scenario {
        Scenario::Discrete { spec, n_list } => {
            let n = order
                .or(n_list.last().copied())
                .ok_or_else(|| Failure::Validation("n_list is empty; give --n or list an order".into()))?;
            let s = discrete_spectrum(spec, n, &p)?;
            write_spectrum(&mut w, cfg, base.with("N", n), &s, predicted.as_ref())?;
        }
        Scenario::Continuous { spec, grids } => {
            let g = grids
                .last()
                .ok_or_else(|| Failure::Validation("grids is empty".into()))?;
            let s = continuous_spectrum(spec, g, &p)?;
            write_spectrum(&mut w, cfg, base.with("grid", g.describe()), &s, predicted.as_ref())?;
        }
        Scenario::Symbol { .. } => {
            return Err(Failure::Validation(
                "spectrum needs a discrete or continuous scenario".into(),
            ))
        }
    }
    w.finish()
}

fn verify_into(
    w: &mut Writer,
    cfg: &ScenarioConfig,
    p: &LanczosParams,
    cache: Option<&[(usize, SpectrumResult)]>,
) -> Result<(), Failure> {
    let base = meta(cfg, p);
    let (lo, hi) = cfg.fit.window;
    match &cfg.scenario {
        Scenario::Discrete { spec, n_list } => {
            if n_list.is_empty() {
                return Err(Failure::Validation("verify needs a non-empty n_list".into()));
            }
            let predicted = predict_discrete(spec)?;
            let report = truncation_study_with(predicted, n_list, lo..=hi, cfg.fit.model, |n| {
                match cache.and_then(|c| c.iter().find(|x| x.0 == n)) {
                    Some((_, s)) => Ok(s.clone()),
                    None => discrete_spectrum(spec, n, p),
                }
            })?;
            for row in &report.rows {
                w.line(format!(
                    "N = {}: a_hat+ = {}, a_hat- = {}, deviation = {}",
                    row.n, row.a_hat_plus, row.a_hat_minus, row.deviation
                ));
                w.outcome.converged &= row.converged;
            }
            if !report.worsened.is_empty() {
                w.line(format!("deviation grew at N = {:?}", report.worsened));
            }
            w.file("verify.json", &json(&base, &report)?)?;
        }
        Scenario::Continuous { spec, grids } => {
            let report = convergence_report(spec, grids, lo..=hi, p)?;
            for (g, c) in report.rows.iter().skip(1).zip(&report.changes) {
                w.line(format!("{}: max relative change {}", g.grid.describe(), c));
            }
            w.outcome.converged &= report.rows.iter().all(|r| r.converged);
            w.file("verify.json", &json(&base, &report)?)?;
        }
        Scenario::Symbol {
            spec,
            log2_samples,
            check_window,
        } => {
            let check = fourier_check(spec, *log2_samples, *check_window, p.mode)?;
            w.line(format!(
                "Fourier check over j in [{}, {}]: max deviation {}, dyadic deviation decreasing = {}",
                check_window.0, check_window.1, check.max_deviation, check.decreasing
            ));
            w.file("verify.json", &json(&base.with("samples", check.samples), &check)?)?;
        }
    }
    Ok(())
}

pub fn verify(cfg: &ScenarioConfig, ctx: &Context) -> Result<Outcome, Failure> {
    let p = params(cfg, ctx);
    let mut w = Writer::new(&ctx.out)?;
    write_prediction(&mut w, cfg, &meta(cfg, &p))?;
    verify_into(&mut w, cfg, &p, None)?;
    w.finish()
}

fn symbol_into(w: &mut Writer, cfg: &ScenarioConfig, p: &LanczosParams) -> Result<(), Failure> {
    let Scenario::Symbol {
        spec,
        log2_samples,
        check_window,
    } = &cfg.scenario
    else {
        return Err(Failure::Validation("symbol needs a symbol scenario".into()));
    };
    let base = meta(cfg, p).with("samples", 1usize << log2_samples);
    let samples = sample_aslog(spec, *log2_samples, p.mode)?;
    let thetas = circle_angles(samples.len());
    let stride = (samples.len() / SYMBOL_DUMP_ROWS).max(1);
    let pick_t: Vec<f64> = thetas.iter().step_by(stride).copied().collect();
    let pick_v: Vec<_> = samples.iter().step_by(stride).copied().collect();
    let mut csv = Vec::new();
    base.clone().with("stride", stride).write_header(&mut csv)?;
    write_symbol_csv(&mut csv, &pick_t, &pick_v)?;
    w.file("symbol.csv", &csv)?;

    let check = fourier_check(spec, *log2_samples, *check_window, p.mode)?;
    let mut csv = String::new();
    let mut head = Vec::new();
    base.write_header(&mut head)?;
    csv.push_str(&String::from_utf8_lossy(&head));
    csv.push_str("j,re,im,ratio\n");
    for r in &check.rows {
        let _ = writeln!(csv, "{},{},{},{}", r.j, fmt_f64(r.re), fmt_f64(r.im), fmt_f64(r.ratio));
    }
    w.file("fourier.csv", csv.as_bytes())?;
    w.file("fit.json", &json(&base, &check)?)?;
    w.line(format!(
        "Fourier check over j in [{}, {}]: max deviation {}, dyadic deviation decreasing = {}",
        check_window.0, check_window.1, check.max_deviation, check.decreasing
    ));
    Ok(())
}

pub fn symbol(cfg: &ScenarioConfig, ctx: &Context) -> Result<Outcome, Failure> {
    let p = params(cfg, ctx);
    let mut w = Writer::new(&ctx.out)?;
    write_prediction(&mut w, cfg, &meta(cfg, &p))?;
    symbol_into(&mut w, cfg, &p)?;
    w.finish()
}

/// Full pipeline: prediction, spectra, fit and, where several orders or
/// grids are listed, the convergence study.
pub fn run(cfg: &ScenarioConfig, ctx: &Context) -> Result<Outcome, Failure> {
    let p = params(cfg, ctx);
    let base = meta(cfg, &p);
    let mut w = Writer::new(&ctx.out)?;
    let predicted = write_prediction(&mut w, cfg, &base)?;
    match &cfg.scenario {
        Scenario::Discrete { n_list, .. } => {
            if n_list.is_empty() {
                w.line("no orders listed; prediction only");
                return w.finish();
            }
            let spectra = solve_discrete_all(cfg, &p)?;
            let (n, s) = spectra.last().expect("non-empty");
            write_spectrum(&mut w, cfg, base.clone().with("N", n), s, predicted.as_ref())?;
            if spectra.len() > 1 {
                verify_into(&mut w, cfg, &p, Some(&spectra))?;
            }
        }
        Scenario::Continuous { spec, grids } => {
            let Some(g) = grids.last() else {
                w.line("no grids listed; prediction only");
                return w.finish();
            };
            let s = continuous_spectrum(spec, g, &p)?;
            write_spectrum(
                &mut w,
                cfg,
                base.clone().with("grid", g.describe()),
                &s,
                predicted.as_ref(),
            )?;
            if grids.len() > 1 {
                verify_into(&mut w, cfg, &p, None)?;
            }
        }
        Scenario::Symbol { .. } => symbol_into(&mut w, cfg, &p)?,
    }
    w.finish()
}
