//! The `simulate` and `reproduce` commands: run batches through the harness
//! and write CSVs, charts, and the resolved configuration. All outputs are
//! deterministic functions of the configuration, so reruns are
//! byte-identical.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clucb::environment::ProblemInstance;
use clucb::harness::{
    aggregate, fmt_float, run_batch, violation_fraction, Aggregate, EpisodeSummary, RunTrace,
    write_aggregate_csv, write_trace_csv,
};
use log::info;

use crate::config::{PolicyName, RunConfig};
use crate::svg::{thin_points, BarChart, BarGroup, LineChart, Series};

/// Cap on polyline points per series in emitted charts.
const CHART_POINT_CAP: usize = 500;

/// The window, in rounds, over which constraint violations are charted.
const VIOLATION_WINDOW: usize = 1_000;

pub enum Figure {
    /// Per-step regret over time for the unconstrained policy and the
    /// conservative one across safety levels.
    Fig1,
    /// Percentage of early rounds violating the constraint, per policy and
    /// safety level.
    Fig2,
    /// End-horizon per-step regret against the safety level.
    Fig3,
}

impl Figure {
    pub fn stem(&self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn alpha_name(alpha: f64) -> String {
    format!("{alpha}")
}

/// Runs one batch and keeps, besides the per-episode summaries, the first
/// run's full trace already rendered to CSV bytes.
fn batch_with_first_trace(
    instance: &ProblemInstance,
    cfg: &RunConfig,
    policy: PolicyName,
    alpha: f64,
) -> Result<(Vec<u8>, Vec<EpisodeSummary>)> {
    let spec = policy.spec(alpha, cfg.strict_nested);
    let params = cfg.params(alpha);
    let thinning = cfg.thinning;
    let results = run_batch(
        instance,
        &spec,
        &params,
        cfg.master_seed,
        cfg.seeds,
        |tr: RunTrace| {
            let first = (tr.run == 0).then(|| {
                let mut bytes = Vec::new();
                write_trace_csv(&mut bytes, &tr).expect("csv into memory");
                bytes
            });
            (first, tr.summarize_with(thinning))
        },
    )?;
    let mut first_trace = Vec::new();
    let mut summaries = Vec::with_capacity(results.len());
    for (first, summary) in results {
        if let Some(bytes) = first {
            first_trace = bytes;
        }
        summaries.push(summary);
    }
    Ok((first_trace, summaries))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    sum / n.max(1) as f64
}

/// Runs every configured policy over its safety grid; writes one trace CSV
/// per series (first run), a combined aggregate CSV, the instance, and the
/// resolved config.
pub fn simulate(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg.out_dir();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let instance = cfg.instance.resolve()?;

    let mut aggregates: Vec<Aggregate> = Vec::new();
    let mut trace_files = 0usize;
    for entry in &cfg.policies {
        for &alpha in &entry.alphas {
            let started = std::time::Instant::now();
            let (first_trace, summaries) =
                batch_with_first_trace(&instance, cfg, entry.policy, alpha)?;
            let label = entry.policy.label();
            let trace_path = out.join(format!("trace_{label}_alpha{}.csv", alpha_name(alpha)));
            std::fs::write(&trace_path, &first_trace)
                .with_context(|| format!("writing {}", trace_path.display()))?;
            trace_files += 1;

            let end_regret = mean(
                summaries
                    .iter()
                    .map(|s| s.final_regret / s.horizon.max(1) as f64),
            );
            println!(
                "{label} alpha={}: mean end per-step regret {end_regret:.4}, \
                 violating episodes {:.0}%",
                alpha_name(alpha),
                100.0 * violation_fraction(&summaries),
            );
            info!(
                "{label} alpha={alpha}: {} runs of {} rounds in {:.1}s",
                cfg.seeds,
                cfg.horizon,
                started.elapsed().as_secs_f64()
            );
            aggregates.push(aggregate(label, alpha, &summaries)?);
        }
    }

    let mut agg_bytes = Vec::new();
    write_aggregate_csv(&mut agg_bytes, &aggregates).expect("csv into memory");
    let agg_path = out.join("aggregate.csv");
    std::fs::write(&agg_path, &agg_bytes)
        .with_context(|| format!("writing {}", agg_path.display()))?;

    instance
        .save(&out.join("instance.json"))
        .context("writing instance.json")?;
    write_text(
        &out.join("run_config.json"),
        &format!("{}\n", serde_json::to_string_pretty(cfg)?),
    )?;

    println!(
        "wrote {trace_files} trace files, aggregate.csv, instance.json, run_config.json to {}",
        out.display()
    );
    Ok(out)
}

/// Regenerates the data and chart behind one figure of the simulation study.
pub fn reproduce(cfg: &RunConfig, figure: &Figure, alphas: &[f64]) -> Result<PathBuf> {
    let out = cfg.out_dir();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let instance = cfg.instance.resolve()?;

    let (csv, svg) = match figure {
        Figure::Fig1 => fig1(&instance, cfg, alphas)?,
        Figure::Fig2 => fig2(&instance, cfg, alphas)?,
        Figure::Fig3 => fig3(&instance, cfg, alphas)?,
    };
    let stem = figure.stem();
    write_text(&out.join(format!("{stem}.csv")), &csv)?;
    write_text(&out.join(format!("{stem}.svg")), &svg)?;
    println!("wrote {stem}.csv and {stem}.svg to {}", out.display());
    Ok(out)
}

/// Per-step regret curves: the unconstrained policy once, the conservative
/// one per safety level.
fn fig1(instance: &ProblemInstance, cfg: &RunConfig, alphas: &[f64]) -> Result<(String, String)> {
    let mut aggregates = Vec::new();
    let judged_at = alphas[0];
    let summaries = summaries_only(instance, cfg, PolicyName::Lucb, judged_at)?;
    aggregates.push(aggregate("lucb", judged_at, &summaries)?);
    for &alpha in alphas {
        let summaries = summaries_only(instance, cfg, PolicyName::Clucb, alpha)?;
        aggregates.push(aggregate("clucb", alpha, &summaries)?);
    }

    let mut csv = Vec::new();
    write_aggregate_csv(&mut csv, &aggregates).expect("csv into memory");

    let series = aggregates
        .iter()
        .enumerate()
        .map(|(i, agg)| Series {
            label: if i == 0 {
                "LUCB".to_string()
            } else {
                format!("CLUCB alpha={}", alpha_name(agg.alpha))
            },
            points: thin_points(
                agg.points
                    .iter()
                    .map(|p| (p.t as f64, p.mean_per_step_regret))
                    .collect(),
                CHART_POINT_CAP,
            ),
            markers: false,
            dashed: i == 0,
        })
        .collect();
    let chart = LineChart {
        title: format!(
            "Per-step regret, mean over {} runs, horizon {}",
            cfg.seeds, cfg.horizon
        ),
        x_label: "round".to_string(),
        y_label: "per-step regret".to_string(),
        series,
    };
    Ok((String::from_utf8(csv).expect("ascii csv"), chart.render()))
}

/// Violation percentages over the early window, judged at each safety level
/// for both policies.
fn fig2(instance: &ProblemInstance, cfg: &RunConfig, alphas: &[f64]) -> Result<(String, String)> {
    let window = VIOLATION_WINDOW.min(cfg.horizon);
    let mut short = cfg.clone();
    short.horizon = window;

    let mut csv = String::from("policy,alpha,violation_pct\n");
    let mut groups = Vec::new();
    for &alpha in alphas {
        let mut pcts = Vec::new();
        for policy in [PolicyName::Lucb, PolicyName::Clucb] {
            let spec = policy.spec(alpha, short.strict_nested);
            let params = short.params(alpha);
            let counts = run_batch(
                instance,
                &spec,
                &params,
                short.master_seed,
                short.seeds,
                |tr: RunTrace| tr.records.iter().filter(|r| r.violated).count(),
            )?;
            let total: usize = counts.iter().sum();
            let pct = 100.0 * total as f64 / (short.seeds as usize * window) as f64;
            csv.push_str(&format!(
                "{},{},{}\n",
                policy.label(),
                fmt_float(alpha),
                fmt_float(pct)
            ));
            pcts.push(pct);
        }
        groups.push(BarGroup {
            label: format!("alpha={}", alpha_name(alpha)),
            values: pcts,
        });
    }
    let chart = BarChart {
        title: format!(
            "Rounds violating the constraint in the first {window}, mean over {} runs",
            short.seeds
        ),
        x_label: "safety level".to_string(),
        y_label: "violated rounds (%)".to_string(),
        series_labels: vec!["LUCB".to_string(), "CLUCB".to_string()],
        groups,
    };
    Ok((csv, chart.render()))
}

/// End-horizon per-step regret against the safety level, with the
/// unconstrained policy as the flat reference.
fn fig3(instance: &ProblemInstance, cfg: &RunConfig, alphas: &[f64]) -> Result<(String, String)> {
    let end_mean = |policy: PolicyName, alpha: f64| -> Result<f64> {
        let spec = policy.spec(alpha, cfg.strict_nested);
        let params = cfg.params(alpha);
        let finals = run_batch(
            instance,
            &spec,
            &params,
            cfg.master_seed,
            cfg.seeds,
            |tr: RunTrace| tr.final_regret() / tr.horizon().max(1) as f64,
        )?;
        Ok(mean(finals.into_iter()))
    };

    let lucb = end_mean(PolicyName::Lucb, alphas[0])?;
    let mut clucb_points = Vec::new();
    let mut csv = String::from("policy,alpha,per_step_regret\n");
    for &alpha in alphas {
        let v = end_mean(PolicyName::Clucb, alpha)?;
        clucb_points.push((alpha, v));
        csv.push_str(&format!("clucb,{},{}\n", fmt_float(alpha), fmt_float(v)));
    }
    for &alpha in alphas {
        csv.push_str(&format!("lucb,{},{}\n", fmt_float(alpha), fmt_float(lucb)));
    }

    let chart = LineChart {
        title: format!(
            "Per-step regret at round {}, mean over {} runs",
            cfg.horizon, cfg.seeds
        ),
        x_label: "safety level alpha".to_string(),
        y_label: "per-step regret".to_string(),
        series: vec![
            Series {
                label: "CLUCB".to_string(),
                points: clucb_points,
                markers: true,
                dashed: false,
            },
            Series {
                label: "LUCB".to_string(),
                points: alphas.iter().map(|&a| (a, lucb)).collect(),
                markers: false,
                dashed: true,
            },
        ],
    };
    Ok((csv, chart.render()))
}

fn summaries_only(
    instance: &ProblemInstance,
    cfg: &RunConfig,
    policy: PolicyName,
    alpha: f64,
) -> Result<Vec<EpisodeSummary>> {
    let spec = policy.spec(alpha, cfg.strict_nested);
    let params = cfg.params(alpha);
    let thinning = cfg.thinning;
    Ok(run_batch(
        instance,
        &spec,
        &params,
        cfg.master_seed,
        cfg.seeds,
        |tr: RunTrace| tr.summarize_with(thinning),
    )?)
}
