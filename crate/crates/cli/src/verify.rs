//! Verification suites behind `clucb verify`: numeric sweeps of the
//! supporting inequalities, the ellipsoid geometry oracle, confidence-set
//! coverage, and the conservative-rounds bounds. Every suite uses fixed
//! seeds, so reports are byte-identical across runs.

use std::path::Path;

use anyhow::{Context, Result};
use clucb::environment::{generate_instance, GenerateConfig};
use clucb::harness::{
    conservative_rounds_limit, decompose_regret, elliptical_potential_check,
    implicit_log_bound_check, run_batch, sqrt_log_peak_check, ConservativeBoundInputs,
    InequalityCheck, PolicySpec, RunTrace, SimParams,
};
use clucb::linalg::NormMode;
use clucb::{ConfidenceSet, SpdState, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

#[derive(Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: usize,
    pub failures: usize,
    pub cases: Vec<InequalityCheck>,
}

impl SuiteReport {
    fn new(suite: &'static str, cases: Vec<InequalityCheck>) -> Self {
        let failures = cases.iter().filter(|c| !c.ok).count();
        SuiteReport {
            suite,
            checks: cases.len(),
            failures,
            cases,
        }
    }
}

/// Runs the named suites and writes one `verify_<suite>.json` per suite.
/// Returns the total failure count.
pub fn run_and_write(suites: &[&'static str], out_dir: &Path) -> Result<usize> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let mut failures = 0;
    for &name in suites {
        let report = match name {
            "lemmas" => lemmas_suite()?,
            "geometry" => geometry_suite()?,
            "coverage" => coverage_suite()?,
            "bounds" => bounds_suite()?,
            other => anyhow::bail!("unknown suite `{other}`"),
        };
        let path = out_dir.join(format!("verify_{name}.json"));
        let text = format!("{}\n", serde_json::to_string_pretty(&report)?);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        let verdict = if report.failures == 0 { "ok" } else { "FAILED" };
        println!(
            "suite {name}: {} checks, {} failures ({verdict}) -> {}",
            report.checks,
            report.failures,
            path.display()
        );
        failures += report.failures;
    }
    Ok(failures)
}

fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn gauss_vector(rng: &mut ChaCha12Rng, dim: usize) -> Vector {
    Vector::new((0..dim).map(|_| standard_normal(rng)).collect())
}

fn unit_vector(rng: &mut ChaCha12Rng, dim: usize) -> Vector {
    loop {
        let v = gauss_vector(rng, dim);
        let n = v.norm();
        if n > 1e-8 {
            return v.scaled(1.0 / n);
        }
    }
}

/// The elliptical-potential sweep plus the two scalar-inequality grids.
fn lemmas_suite() -> Result<SuiteReport> {
    let mut cases = Vec::new();

    for i in 0..200u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(21_000 + i);
        let dim = 1 + (i as usize) % 5;
        let k = rng.gen_range(50..=1000);
        let lambda = rng.gen_range(0.2..2.2);
        let features: Vec<Vector> = (0..k)
            .map(|_| unit_vector(&mut rng, dim).scaled(rng.gen_range(0.0..3.0)))
            .collect();
        let mut check = elliptical_potential_check(&features, lambda)?;
        check.label = format!("potential seq={i} d={dim} k={k}");
        cases.push(check);
    }

    let grid = [0.1, 1.0, 10.0];
    for &c1 in &grid {
        for &c2 in &grid {
            for &c3 in &grid {
                let mut check = sqrt_log_peak_check(c1, c2, c3)?;
                check.label = format!("sqrt-log peak c1={c1} c2={c2} c3={c3}");
                cases.push(check);
            }
        }
    }

    let log_grid: [f64; 6] = [0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
    for &c1 in &log_grid {
        for &c2 in &log_grid {
            if (c1 * c2).ln() < 1.0 {
                continue;
            }
            let mut check = implicit_log_bound_check(c1, c2)?;
            check.label = format!("implicit log bound c1={c1} c2={c2}");
            cases.push(check);
        }
    }

    Ok(SuiteReport::new("lemmas", cases))
}

/// Closed-form ellipsoid maxima against boundary sampling, plus exact
/// diagonal cases.
fn geometry_suite() -> Result<SuiteReport> {
    const SAMPLES: usize = 100_000;
    let mut cases = Vec::new();

    for i in 0..100u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(31_000 + i);
        let dim = 2 + (i as usize) % 3;
        let lambda = rng.gen_range(0.5..1.5);
        let mut spd = SpdState::new(dim, lambda)?;
        let n_updates = rng.gen_range(0..=dim + 16);
        for _ in 0..n_updates {
            let u = unit_vector(&mut rng, dim).scaled(rng.gen_range(0.0..1.5));
            spd.rank_one_update(&u)?;
        }
        let center = gauss_vector(&mut rng, dim).scaled(0.5);
        let radius = rng.gen_range(0.05..0.25);
        let probe_dir = unit_vector(&mut rng, dim);
        let base_norm = spd.weighted_norm(&probe_dir, NormMode::Inverse)?;
        let amplitude = rng.gen_range(0.05..0.25);
        let phi = probe_dir.scaled(amplitude / (radius * base_norm));

        let set = ConfidenceSet::ellipsoid(center.clone(), spd.clone(), radius, None);
        let closed = set.max_linear(&phi).0;

        let offset = center.dot(&phi);
        let mut sampled = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            let u = gauss_vector(&mut rng, dim);
            let w = spd.solve(&u)?;
            let den = u.dot(&w).sqrt();
            if den == 0.0 {
                continue;
            }
            sampled = sampled.max(offset + radius * phi.dot(&w) / den);
        }

        cases.push(InequalityCheck::new(
            format!("geometry case={i} d={dim}: sampled max below closed form"),
            sampled,
            closed + 1e-9,
        ));
        cases.push(InequalityCheck::new(
            format!("geometry case={i} d={dim}: closed form within 1e-3 of sampled max"),
            closed,
            sampled + 1e-3,
        ));
    }

    for i in 0..20u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(32_000 + i);
        let dim = 2 + (i as usize) % 3;
        let lambda = rng.gen_range(0.5..1.5);
        let mut spd = SpdState::new(dim, lambda)?;
        let mut diag = vec![lambda; dim];
        for (j, d) in diag.iter_mut().enumerate() {
            let s: f64 = rng.gen_range(0.0..2.0);
            let mut axis = vec![0.0; dim];
            axis[j] = s;
            spd.rank_one_update(&Vector::new(axis))?;
            *d += s * s;
        }
        let center = gauss_vector(&mut rng, dim);
        let radius = rng.gen_range(0.05..1.0);
        let phi = gauss_vector(&mut rng, dim);
        let analytic = center.dot(&phi)
            + radius
                * phi
                    .iter()
                    .zip(&diag)
                    .map(|(p, d)| p * p / d)
                    .sum::<f64>()
                    .sqrt();
        let closed = ConfidenceSet::ellipsoid(center, spd, radius, None)
            .max_linear(&phi)
            .0;
        cases.push(InequalityCheck::new(
            format!("geometry diagonal case={i} d={dim}: closed form matches analytic"),
            (closed - analytic).abs(),
            1e-10 * (1.0 + analytic.abs()),
        ));
    }

    Ok(SuiteReport::new("geometry", cases))
}

/// Empirical any-round coverage failure rate of the ellipsoidal sets at a
/// loose failure budget, small instance.
fn coverage_suite() -> Result<SuiteReport> {
    let instance = generate_instance(&GenerateConfig {
        d: 2,
        k: 10,
        sigma: 1.0,
        baseline_rank: 3,
        seed: 7,
    })?;
    let params = SimParams {
        lambda: 1.0,
        delta: 0.1,
        horizon: 200,
        constraint_alpha: 0.1,
    };
    let episodes = 500;
    let failed: usize = run_batch(
        &instance,
        &PolicySpec::Lucb,
        &params,
        303,
        episodes,
        |tr: RunTrace| usize::from(tr.coverage_failure_rounds() > 0),
    )?
    .into_iter()
    .sum();
    let rate = failed as f64 / episodes as f64;
    let cases = vec![InequalityCheck::new(
        format!("any-round coverage failure rate over {episodes} episodes at delta=0.1"),
        rate,
        0.15,
    )];
    Ok(SuiteReport::new("coverage", cases))
}

/// Per-episode checks of the regret decomposition identity, the
/// conservative-regret cap, and the worst-case conservative-rounds limit.
fn bounds_suite() -> Result<SuiteReport> {
    let instance = generate_instance(&GenerateConfig {
        d: 4,
        k: 100,
        sigma: 1.0,
        baseline_rank: 10,
        seed: 2024,
    })?;
    let mut cases = Vec::new();
    for alpha in [0.1, 0.2] {
        let params = SimParams {
            lambda: 1.0,
            delta: 0.001,
            horizon: 2_000,
            constraint_alpha: alpha,
        };
        let limit = conservative_rounds_limit(&ConservativeBoundInputs {
            dim: instance.dim,
            param_bound: instance.param_bound,
            feature_bound: instance.feature_bound,
            sigma: instance.sigma,
            lambda: params.lambda,
            delta: params.delta,
            alpha,
            reward_floor: instance.baseline.reward_floor,
            gap_floor: instance.baseline.gap_floor,
        })?;
        let gap_ceiling = instance.baseline.gap_ceiling;
        let per_episode = run_batch(
            &instance,
            &PolicySpec::Clucb { alpha },
            &params,
            404,
            20,
            |tr: RunTrace| {
                let dec = decompose_regret(&tr);
                (tr.run, dec, tr.coverage_failure_rounds())
            },
        )?;
        for (run, dec, coverage_failures) in per_episode {
            cases.push(InequalityCheck::new(
                format!("decomposition identity alpha={alpha} run={run}"),
                dec.identity_error,
                1e-9,
            ));
            cases.push(InequalityCheck::new(
                format!("conservative regret cap alpha={alpha} run={run}"),
                dec.conservative_part,
                dec.conservative_rounds as f64 * gap_ceiling + 1e-9,
            ));
            if coverage_failures == 0 {
                cases.push(InequalityCheck::new(
                    format!("conservative rounds limit alpha={alpha} run={run}"),
                    dec.conservative_rounds as f64,
                    limit,
                ));
            }
        }
    }
    Ok(SuiteReport::new("bounds", cases))
}
