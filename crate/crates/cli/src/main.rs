//! Command-line front end: reads a scenario file, runs it and writes
//! `spectrum.csv`, `fit.json`, `prediction.json` and `summary.txt`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hankel_spectra::Parallelism;

use commands::{Context, Outcome};
use config::ScenarioConfig;

#[derive(Parser)]
#[command(name = "hankel-spectra", version, about = "Spectral asymptotics of Hankel operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (defaults to the config's `outputs`, then `out/<name>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 keeps the solver on its sequential path.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Overrides `solver.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form coefficients only.
    Predict {
        #[arg(long)]
        config: PathBuf,
    },
    /// Spectrum and fit at one order or grid.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        /// Truncation order (defaults to the last entry of `n_list`).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Truncation or grid study against the prediction.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Runs several scenarios, each into `<out>/<name>`.
    Sweep {
        #[arg(long, required = true, num_args = 1..)]
        config: Vec<PathBuf>,
    },
    /// Symbol sampling and Fourier coefficient check.
    Symbol {
        #[arg(long)]
        config: PathBuf,
    },
    /// Full pipeline for one scenario.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    NotConverged(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::NotConverged(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::NotConverged(m) | Failure::Io(m) => m,
        }
    }
}

impl From<hankel_spectra::Error> for Failure {
    fn from(e: hankel_spectra::Error) -> Self {
        use hankel_spectra::Error as E;
        match e {
            E::Domain(_) | E::Unsupported(_) | E::Resource(_) => Failure::Validation(e.to_string()),
            E::NotConverged(_) => Failure::NotConverged(e.to_string()),
            E::Io(_) => Failure::Io(e.to_string()),
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, Failure> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        cfg.solver.seed = s;
    }
    Ok(cfg)
}

fn out_dir(cli_out: &Option<PathBuf>, cfg: &ScenarioConfig) -> PathBuf {
    cli_out
        .clone()
        .or_else(|| cfg.outputs.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name))
}

fn setup_threads(threads: usize) -> Result<Parallelism, Failure> {
    if threads == 0 {
        return Err(Failure::Validation("--threads must be at least 1".into()));
    }
    if threads == 1 {
        return Ok(Parallelism::Sequential);
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Io(format!("cannot start thread pool: {e}")))?;
        Ok(Parallelism::Rayon)
    }
    #[cfg(not(feature = "parallel"))]
    {
        eprintln!("warning: built without the `parallel` feature; running sequentially");
        Ok(Parallelism::Sequential)
    }
}

fn finish(name: &str, result: Result<Outcome, Failure>) -> u8 {
    match result {
        Ok(o) => {
            for f in &o.files {
                println!("{name}: wrote {}", f.display());
            }
            if o.converged {
                0
            } else {
                eprintln!("{name}: solver did not converge; outputs hold the resolved part");
                3
            }
        }
        Err(f) => {
            eprintln!("{name}: error: {}", f.message());
            f.code()
        }
    }
}

fn sweep(cli: &Cli, configs: &[PathBuf], mode: Parallelism) -> u8 {
    let one = |path: &PathBuf| -> (String, Result<Outcome, Failure>) {
        match load(path, cli.seed) {
            Ok(cfg) => {
                let base = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
                let ctx = Context {
                    out: base.join(&cfg.name),
                    mode,
                };
                (cfg.name.clone(), commands::run(&cfg, &ctx))
            }
            Err(f) => (path.display().to_string(), Err(f)),
        }
    };
    #[cfg(feature = "parallel")]
    let results: Vec<_> = if mode == Parallelism::Rayon {
        use rayon::prelude::*;
        configs.par_iter().map(one).collect()
    } else {
        configs.iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = configs.iter().map(one).collect();
    results.into_iter().map(|(name, r)| finish(&name, r)).max().unwrap_or(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = match setup_threads(cli.threads) {
        Ok(m) => m,
        Err(f) => return ExitCode::from(finish("hankel-spectra", Err(f))),
    };
    let code = match &cli.command {
        Command::Sweep { config } => sweep(&cli, config, mode),
        Command::Predict { config }
        | Command::Spectrum { config, .. }
        | Command::Verify { config }
        | Command::Symbol { config }
        | Command::Run { config } => {
            let result = load(config, cli.seed).and_then(|cfg| {
                let ctx = Context {
                    out: out_dir(&cli.out, &cfg),
                    mode,
                };
                match &cli.command {
                    Command::Predict { .. } => commands::predict(&cfg, &ctx),
                    Command::Spectrum { n, .. } => commands::spectrum(&cfg, &ctx, *n),
                    Command::Verify { .. } => commands::verify(&cfg, &ctx),
                    Command::Symbol { .. } => commands::symbol(&cfg, &ctx),
                    _ => commands::run(&cfg, &ctx),
                }
            });
            finish(&config.display().to_string(), result)
        }
    };
    ExitCode::from(code)
}
