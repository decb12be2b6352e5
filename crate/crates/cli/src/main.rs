//! `clucb`: run conservative-bandit experiments, regenerate the study's
//! figures, and run the verification suites.
//!
//! Exit codes: 0 on success, 1 on configuration or I/O errors, 2 when a
//! verification suite reports failures.

mod config;
mod run;
mod svg;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use clucb::environment::{generate_instance, GenerateConfig};

use config::{resolve_out_dir, Overrides, PolicyName, RunConfig, Scale, DEFAULT_ALPHAS};
use run::Figure;

#[derive(Parser)]
#[command(
    name = "clucb",
    version,
    about = "Conservative linear bandit simulator",
    long_about = "Simulates an optimistic linear bandit policy (LUCB) and its conservative \
                  variants (CLUCB, CLUCB2), which keep cumulative expected reward above a \
                  (1 - alpha) fraction of a baseline's at every round."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured experiment; write trace and aggregate CSVs.
    Simulate(SimulateArgs),
    /// Regenerate the data and chart behind one study figure.
    Reproduce(ReproduceArgs),
    /// Run a verification suite; exit 2 if any check fails.
    Verify(VerifyArgs),
    /// Generate a random problem instance file.
    GenInstance(GenInstanceArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run-configuration file; flags override its keys.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one config key, e.g. --set horizon=2000 or
    /// --set instance.generate.k=50. Values parse as JSON.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (default: config `out_dir`, then $CBL_OUT, then ./out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Base seed of the per-run noise streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of independent runs.
    #[arg(long)]
    seeds: Option<u64>,
    /// Rounds per episode.
    #[arg(long)]
    horizon: Option<usize>,
    /// Comma-separated safety levels in (0,1), e.g. 0.05,0.1,0.2.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    alpha: Option<Vec<f64>>,
    /// Preset horizon and run count: desk (10,000 x 100) or paper
    /// (40,000 x 1,000).
    #[arg(long, value_enum)]
    scale: Option<Scale>,
    /// Cap on worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Clip confidence-set centers back into the declared parameter ball.
    #[arg(long)]
    strict_nested: bool,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let overrides = Overrides {
            out: self.out.clone(),
            seed: self.seed,
            seeds: self.seeds,
            horizon: self.horizon,
            alpha: self.alpha.clone(),
            scale: self.scale,
            threads: self.threads,
            strict_nested: self.strict_nested,
        };
        RunConfig::resolve(self.config.as_deref(), &self.set, &overrides)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FigureArg {
    /// Per-step regret over time.
    Fig1,
    /// Violation percentage in the first 1,000 rounds.
    Fig2,
    /// End-horizon per-step regret against alpha.
    Fig3,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_enum)]
    figure: FigureArg,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    /// Inequality sweeps: elliptical potential, peak bound, implicit log bound.
    Lemmas,
    /// Closed-form ellipsoid maxima against boundary sampling.
    Geometry,
    /// Empirical confidence-set coverage.
    Coverage,
    /// Regret decomposition and conservative-rounds limits on live episodes.
    Bounds,
    /// Every suite.
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: SuiteArg,
    /// Report directory (default: $CBL_OUT, then ./out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Cap on worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct GenInstanceArgs {
    /// Feature dimension.
    #[arg(long, default_value_t = 4)]
    dim: usize,
    /// Number of arms.
    #[arg(long, default_value_t = 100)]
    arms: usize,
    /// Gaussian noise level.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Baseline arm by mean-reward rank (1 = best).
    #[arg(long, default_value_t = 10)]
    baseline_rank: usize,
    /// Generation seed; the same seed yields a byte-identical file.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Output file (default: instance.json under $CBL_OUT or ./out).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn init_threads(n: Option<usize>) {
    if let Some(n) = n {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_err()
        {
            log::warn!("worker pool already initialized; --threads ignored");
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Cmd::Simulate(args) => {
            let cfg = args.common.resolve()?;
            init_threads(cfg.threads);
            run::simulate(&cfg)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Reproduce(args) => {
            let cfg = args.common.resolve()?;
            init_threads(cfg.threads);
            let figure = match args.figure {
                FigureArg::Fig1 => Figure::Fig1,
                FigureArg::Fig2 => Figure::Fig2,
                FigureArg::Fig3 => Figure::Fig3,
            };
            let alphas = figure_alphas(&cfg);
            run::reproduce(&cfg, &figure, &alphas)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify(args) => {
            init_threads(args.threads);
            let out = resolve_out_dir(args.out.as_deref());
            let suites: Vec<&'static str> = match args.suite {
                SuiteArg::Lemmas => vec!["lemmas"],
                SuiteArg::Geometry => vec!["geometry"],
                SuiteArg::Coverage => vec!["coverage"],
                SuiteArg::Bounds => vec!["bounds"],
                SuiteArg::All => vec!["lemmas", "geometry", "coverage", "bounds"],
            };
            let failures = verify::run_and_write(&suites, &out)?;
            if failures > 0 {
                eprintln!("FAIL: {failures} verification checks failed");
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Cmd::GenInstance(args) => {
            let cfg = GenerateConfig {
                d: args.dim,
                k: args.arms,
                sigma: args.sigma,
                baseline_rank: args.baseline_rank,
                seed: args.seed,
            };
            let instance = generate_instance(&cfg).context("generating the instance")?;
            let path = args
                .out
                .unwrap_or_else(|| resolve_out_dir(None).join("instance.json"));
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)
                        .with_context(|| format!("creating {}", parent.display()))?;
                }
            }
            instance
                .save(&path)
                .with_context(|| format!("writing {}", path.display()))?;
            println!(
                "wrote instance (d={}, arms={}) to {}",
                args.dim,
                args.arms,
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// The safety grid a figure sweeps: the conservative policy's configured
/// grid (every entry holds one after resolution), else the standard five.
fn figure_alphas(cfg: &RunConfig) -> Vec<f64> {
    cfg.policies
        .iter()
        .find(|e| e.policy == PolicyName::Clucb)
        .or_else(|| cfg.policies.first())
        .map(|e| e.alphas.clone())
        .unwrap_or_else(|| DEFAULT_ALPHAS.to_vec())
}
