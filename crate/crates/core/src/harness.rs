//! Simulation harness: episode driver, batch runner, aggregation, CSV
//! output, and numeric checks for the supporting inequalities.
//!
//! An episode drives one policy against one [`ProblemInstance`] for a fixed
//! horizon. Every round records the played action, the realized and mean
//! rewards, the running regret against the best fixed action, and the state
//! of the cumulative safety constraint
//!
//! ```text
//! Σ_{i ≤ t} mean(a_i)  ≥  (1 − alpha) · Σ_{i ≤ t} mean(b_i)
//! ```
//!
//! judged on mean rewards (noise cancels in expectation and the guarantee
//! is about means). Batches fan runs out over a thread pool; results are
//! keyed by `(seed, run)` so the outputs are identical regardless of thread
//! count or scheduling.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::environment::{NoiseModel, ProblemInstance, StreamKey};
use crate::linalg::{NormMode, SpdState, Vector};
use crate::policies::{
    BaselineFollower, Clucb, Clucb2, DecisionKind, Lucb, OraclePolicy, Policy, RoundContext,
};
use crate::confidence::BetaSchedule;
use crate::{Error, Result};

/// Margin below which the constraint is flagged as violated; absorbs float
/// accumulation error in the running sums.
pub const VIOLATION_SLACK: f64 = 1e-9;

/// Fixed parameters of a simulation run.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SimParams {
    /// Ridge regularizer for the estimators.
    pub lambda: f64,
    /// Confidence failure budget.
    pub delta: f64,
    /// Number of rounds per episode.
    pub horizon: usize,
    /// The `alpha` at which the trace's constraint columns are judged.
    /// For the conservative policies this should match the policy's own
    /// `alpha`; for the unconstrained ones it sets the yardstick.
    pub constraint_alpha: f64,
}

impl SimParams {
    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if !(self.constraint_alpha >= 0.0 && self.constraint_alpha < 1.0) {
            return Err(Error::invalid(format!(
                "constraint alpha must lie in [0, 1), got {}",
                self.constraint_alpha
            )));
        }
        Ok(())
    }
}

/// Which policy to run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum PolicySpec {
    /// Unconstrained optimism.
    Lucb,
    /// Conservative, known baseline rewards.
    Clucb { alpha: f64 },
    /// Conservative, unknown baseline rewards.
    Clucb2 { alpha: f64, strict_nested: bool },
    /// Plays the true best arm (needs the hidden parameter).
    Oracle,
    /// Plays the baseline arm every round.
    Baseline,
}

impl PolicySpec {
    pub fn label(&self) -> &'static str {
        match self {
            PolicySpec::Lucb => "lucb",
            PolicySpec::Clucb { .. } => "clucb",
            PolicySpec::Clucb2 { .. } => "clucb2",
            PolicySpec::Oracle => "oracle",
            PolicySpec::Baseline => "baseline",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            PolicySpec::Clucb { alpha } | PolicySpec::Clucb2 { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    /// Instantiates the policy for `instance`.
    pub fn build(
        &self,
        instance: &ProblemInstance,
        params: &SimParams,
    ) -> Result<Box<dyn Policy<f64>>> {
        let sched = BetaSchedule::new(
            instance.sigma,
            instance.dim,
            instance.feature_bound,
            params.lambda,
            params.delta,
            instance.param_bound,
        )?;
        Ok(match *self {
            PolicySpec::Lucb => Box::new(Lucb::new(sched)?),
            PolicySpec::Clucb { alpha } => Box::new(Clucb::new(alpha, sched)?),
            PolicySpec::Clucb2 {
                alpha,
                strict_nested,
            } => Box::new(Clucb2::new(
                alpha,
                instance.baseline.reward_floor,
                sched,
                strict_nested,
            )?),
            PolicySpec::Oracle => Box::new(OraclePolicy::new(instance.theta_star.clone())),
            PolicySpec::Baseline => Box::new(BaselineFollower),
        })
    }
}

/// One simulated round.
#[derive(Clone, Debug)]
pub struct RoundRecord {
    pub t: usize,
    pub action: usize,
    pub kind: DecisionKind,
    /// Observed (noisy) reward.
    pub y: f64,
    /// Mean reward of the played action.
    pub expected_reward: f64,
    /// Mean reward of the best action this round.
    pub optimal_reward: f64,
    /// Mean reward of the baseline action this round.
    pub baseline_reward: f64,
    /// Running regret against the best action.
    pub cum_regret: f64,
    /// Running mean reward of the played actions.
    pub constraint_lhs: f64,
    /// `(1 − alpha)` times the running baseline mean reward.
    pub constraint_rhs: f64,
    pub violated: bool,
    /// Whether the confidence set held the true parameter when the round's
    /// decision was made (always true for set-free policies).
    pub coverage_ok: bool,
}

/// Full trajectory of one episode.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub policy: String,
    /// The `alpha` the constraint columns were judged at.
    pub alpha: f64,
    pub seed: u64,
    pub run: u64,
    pub records: Vec<RoundRecord>,
}

impl RunTrace {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn final_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_regret)
    }

    /// Total rounds played on the baseline fallback.
    pub fn conservative_rounds(&self) -> usize {
        self.conservative_rounds_at(self.records.len())
    }

    /// Baseline-fallback rounds among the first `t`.
    pub fn conservative_rounds_at(&self, t: usize) -> usize {
        self.records[..t.min(self.records.len())]
            .iter()
            .filter(|r| r.kind == DecisionKind::Conservative)
            .count()
    }

    pub fn violation_rounds(&self) -> usize {
        self.records.iter().filter(|r| r.violated).count()
    }

    pub fn coverage_failure_rounds(&self) -> usize {
        self.records.iter().filter(|r| !r.coverage_ok).count()
    }

    pub fn summarize(&self) -> EpisodeSummary {
        self.summarize_with(DEFAULT_REPORT_STRIDE)
    }

    /// [`summarize`](Self::summarize) on the grid thinned by `stride`.
    pub fn summarize_with(&self, stride: usize) -> EpisodeSummary {
        let grid = report_grid_with(self.records.len(), stride);
        let grid_per_step_regret = grid
            .iter()
            .map(|&t| self.records[t - 1].cum_regret / t as f64)
            .collect();
        let grid_violated = grid.iter().map(|&t| self.records[t - 1].violated).collect();
        EpisodeSummary {
            run: self.run,
            horizon: self.records.len(),
            final_regret: self.final_regret(),
            conservative_rounds: self.conservative_rounds(),
            violation_rounds: self.violation_rounds(),
            coverage_failure_rounds: self.coverage_failure_rounds(),
            grid,
            grid_per_step_regret,
            grid_violated,
        }
    }
}

/// Compact per-episode statistics, enough for aggregation.
#[derive(Clone, Debug)]
pub struct EpisodeSummary {
    pub run: u64,
    pub horizon: usize,
    pub final_regret: f64,
    pub conservative_rounds: usize,
    pub violation_rounds: usize,
    pub coverage_failure_rounds: usize,
    /// Reporting rounds, shared by the three vectors below.
    pub grid: Vec<usize>,
    pub grid_per_step_regret: Vec<f64>,
    pub grid_violated: Vec<bool>,
}

/// Default thinning stride for [`report_grid`].
pub const DEFAULT_REPORT_STRIDE: usize = 10;

/// Rounds at which aggregates are reported: every round up to 1000, every
/// tenth round after that, and always the final round.
pub fn report_grid(horizon: usize) -> Vec<usize> {
    report_grid_with(horizon, DEFAULT_REPORT_STRIDE)
}

/// [`report_grid`] with a caller-chosen stride above round 1000; a stride
/// of 1 keeps every round.
pub fn report_grid_with(horizon: usize, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    (1..=horizon)
        .filter(|&t| t <= 1000 || t % stride == 0 || t == horizon)
        .collect()
}

/// Runs one policy for one episode.
/// Neumaier compensated accumulator. Keeps the running sums that feed the
/// recorded columns (and the regret decomposition identity) accurate to one
/// rounding of the true total regardless of horizon; plain accumulation
/// drifts past the 1e-9 identity tolerance around ten thousand rounds.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn run_episode(
    instance: &ProblemInstance,
    spec: &PolicySpec,
    params: &SimParams,
    key: StreamKey,
) -> Result<RunTrace> {
    params.validate()?;
    let mut policy = spec.build(instance, params)?;
    let noise = NoiseModel::gaussian(instance.sigma, key)?;

    let mut records = Vec::with_capacity(params.horizon);
    let mut cum_reward = CompensatedSum::default();
    let mut cum_optimal = CompensatedSum::default();
    let mut cum_baseline = CompensatedSum::default();

    for t in 1..=params.horizon {
        let (baseline_arm, baseline_reward) = instance.baseline_action(t);
        let ctx = RoundContext {
            t,
            arms: &instance.arms,
            baseline_arm,
            baseline_reward,
        };
        // Coverage is judged on the set the decision is about to use.
        let coverage_ok = policy
            .confidence_set()
            .is_none_or(|c| c.contains(&instance.theta_star));
        let decision = policy.decide(&ctx)?;
        let y = instance.pull(t, decision.action, &noise)?;
        policy.update(&ctx, &decision, y)?;

        let expected_reward = instance.mean_reward(decision.action);
        let (_, optimal_reward) = instance.oracle_action(t);
        let baseline_mean = instance.mean_reward(baseline_arm);
        cum_reward.add(expected_reward);
        cum_optimal.add(optimal_reward);
        cum_baseline.add(baseline_mean);
        let constraint_lhs = cum_reward.value();
        let constraint_rhs = (1.0 - params.constraint_alpha) * cum_baseline.value();

        records.push(RoundRecord {
            t,
            action: decision.action,
            kind: decision.kind,
            y,
            expected_reward,
            optimal_reward,
            baseline_reward: baseline_mean,
            cum_regret: cum_optimal.value() - constraint_lhs,
            constraint_lhs,
            constraint_rhs,
            violated: constraint_lhs < constraint_rhs - VIOLATION_SLACK,
            coverage_ok,
        });
    }

    Ok(RunTrace {
        policy: spec.label().to_string(),
        alpha: params.constraint_alpha,
        seed: key.seed,
        run: key.run,
        records,
    })
}

/// Runs `n_runs` independent episodes of the same configuration, one noise
/// stream per run, in parallel. `map` condenses each trace into whatever
/// the caller keeps; results come back ordered by run id.
pub fn run_batch<S: Send>(
    instance: &ProblemInstance,
    spec: &PolicySpec,
    params: &SimParams,
    seed: u64,
    n_runs: u64,
    map: impl Fn(RunTrace) -> S + Sync,
) -> Result<Vec<S>> {
    (0..n_runs)
        .into_par_iter()
        .map(|run| run_episode(instance, spec, params, StreamKey::new(seed, run)).map(&map))
        .collect()
}

/// Per-step regret series `R_t / t` of one episode.
pub fn per_step_regret(trace: &RunTrace) -> Vec<f64> {
    trace
        .records
        .iter()
        .map(|r| r.cum_regret / r.t as f64)
        .collect()
}

/// Percentage of rounds violated within the first `window` rounds, pooled
/// over all traces.
pub fn violation_stats(traces: &[RunTrace], window: usize) -> f64 {
    let mut violated = 0usize;
    let mut total = 0usize;
    for trace in traces {
        let w = window.min(trace.records.len());
        total += w;
        violated += trace.records[..w].iter().filter(|r| r.violated).count();
    }
    if total == 0 {
        0.0
    } else {
        100.0 * violated as f64 / total as f64
    }
}

/// Cross-run statistics at one reporting round.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AggregatePoint {
    pub t: usize,
    pub mean_per_step_regret: f64,
    pub p05: f64,
    pub p95: f64,
    /// Percent of runs whose constraint is violated at this round.
    pub violation_pct: f64,
}

/// Per-policy aggregate over a batch of runs.
#[derive(Clone, Debug, Serialize)]
pub struct Aggregate {
    pub policy: String,
    pub alpha: f64,
    pub points: Vec<AggregatePoint>,
    /// Conservative-round totals, one entry per run in run order.
    pub n_conservative: Vec<usize>,
}

/// Linearly interpolated percentile of an unsorted sample, `p` in [0, 100].
pub fn percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("percentile of NaN"));
    let h = (p / 100.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Condenses per-run summaries into one aggregate curve.
pub fn aggregate(policy: &str, alpha: f64, summaries: &[EpisodeSummary]) -> Result<Aggregate> {
    let first = summaries
        .first()
        .ok_or_else(|| Error::invalid("aggregate needs at least one run"))?;
    if summaries.iter().any(|s| s.grid != first.grid) {
        return Err(Error::invalid("aggregate over runs with different grids"));
    }
    let n = summaries.len() as f64;
    let points = first
        .grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let regrets: Vec<f64> = summaries
                .iter()
                .map(|s| s.grid_per_step_regret[i])
                .collect();
            let violated = summaries.iter().filter(|s| s.grid_violated[i]).count();
            AggregatePoint {
                t,
                mean_per_step_regret: regrets.iter().sum::<f64>() / n,
                p05: percentile(&regrets, 5.0),
                p95: percentile(&regrets, 95.0),
                violation_pct: 100.0 * violated as f64 / n,
            }
        })
        .collect();
    Ok(Aggregate {
        policy: policy.to_string(),
        alpha,
        points,
        n_conservative: summaries.iter().map(|s| s.conservative_rounds).collect(),
    })
}

/// Fraction of runs with at least one violated round.
pub fn violation_fraction(summaries: &[EpisodeSummary]) -> f64 {
    if summaries.is_empty() {
        return 0.0;
    }
    summaries.iter().filter(|s| s.violation_rounds > 0).count() as f64 / summaries.len() as f64
}

/// Fixed float formatting for CSV output: scientific with ten significant
/// digits, so files are byte-stable across platforms.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.9e}")
}

pub const TRACE_CSV_HEADER: &str = "t,policy,alpha,action,kind,y,expected_reward,optimal_reward,baseline_reward,cum_regret,constraint_lhs,constraint_rhs,violated,coverage_ok";

pub const AGGREGATE_CSV_HEADER: &str = "t,policy,alpha,mean_per_step_regret,p05,p95,violation_pct";

fn kind_label(kind: DecisionKind) -> &'static str {
    match kind {
        DecisionKind::Optimistic => "optimistic",
        DecisionKind::Conservative => "conservative",
    }
}

/// Writes one episode as CSV.
pub fn write_trace_csv<W: Write>(w: &mut W, trace: &RunTrace) -> io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            trace.policy,
            fmt_float(trace.alpha),
            r.action,
            kind_label(r.kind),
            fmt_float(r.y),
            fmt_float(r.expected_reward),
            fmt_float(r.optimal_reward),
            fmt_float(r.baseline_reward),
            fmt_float(r.cum_regret),
            fmt_float(r.constraint_lhs),
            fmt_float(r.constraint_rhs),
            r.violated,
            r.coverage_ok,
        )?;
    }
    Ok(())
}

/// Writes one or more aggregate curves as CSV.
pub fn write_aggregate_csv<W: Write>(w: &mut W, aggregates: &[Aggregate]) -> io::Result<()> {
    writeln!(w, "{AGGREGATE_CSV_HEADER}")?;
    for agg in aggregates {
        for p in &agg.points {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                p.t,
                agg.policy,
                fmt_float(agg.alpha),
                fmt_float(p.mean_per_step_regret),
                fmt_float(p.p05),
                fmt_float(p.p95),
                fmt_float(p.violation_pct),
            )?;
        }
    }
    Ok(())
}

/// Outcome of one numeric inequality check: `lhs ≤ rhs` up to float slack.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl InequalityCheck {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let ok = lhs <= rhs + 1e-12 * rhs.abs().max(1.0);
        InequalityCheck {
            label: label.into(),
            lhs,
            rhs,
            ok,
        }
    }
}

/// Checks the elliptical potential bound on a concrete feature sequence:
///
/// ```text
/// Σ_{i=1..k} min(1, ‖X_i‖²_{V_{i-1}⁻¹})  ≤  2·d·ln(1 + k·D²/(λ·d))
/// ```
///
/// with `V_i = λI + Σ_{j≤i} X_j X_jᵀ` and `D = max ‖X_i‖`.
pub fn elliptical_potential_check(features: &[Vector<f64>], lambda: f64) -> Result<InequalityCheck> {
    let dim = features
        .first()
        .ok_or_else(|| Error::invalid("potential check needs at least one feature"))?
        .dim();
    let mut v = SpdState::new(dim, lambda)?;
    let mut lhs = 0.0;
    let mut max_norm: f64 = 0.0;
    for x in features {
        let w = v.weighted_norm(x, NormMode::Inverse)?;
        lhs += (w * w).min(1.0);
        v.rank_one_update(x)?;
        max_norm = max_norm.max(x.norm());
    }
    let k = features.len() as f64;
    let d = dim as f64;
    let rhs = 2.0 * d * (1.0 + k * max_norm * max_norm / (lambda * d)).ln();
    Ok(InequalityCheck::new(
        format!("potential(k={}, d={dim}, lambda={lambda})", features.len()),
        lhs,
        rhs,
    ))
}

/// The excursion `g(m) = −c₃·m + c₁·√m·ln(c₂·m)` bounded by
/// [`sqrt_log_peak_check`].
pub fn sqrt_log_excursion(c1: f64, c2: f64, c3: f64, m: f64) -> f64 {
    -c3 * m + c1 * m.sqrt() * (c2 * m).ln()
}

/// Checks the peak bound for the excursion `g(m) = −c₃·m + c₁·√m·ln(c₂·m)`
/// over `m ≥ 2`:
///
/// ```text
/// max_m g(m)  ≤  (16·c₁²/(9·c₃)) · [ln(2·c₁·√c₂·e/c₃)]²
/// ```
///
/// The left side is maximized numerically on a log grid refined around the
/// best point.
pub fn sqrt_log_peak_check(c1: f64, c2: f64, c3: f64) -> Result<InequalityCheck> {
    if !(c1 > 0.0 && c2 > 0.0 && c3 > 0.0) {
        return Err(Error::invalid("peak check needs positive coefficients"));
    }
    let g = |m: f64| sqrt_log_excursion(c1, c2, c3, m);
    let lo: f64 = 2.0;
    let hi: f64 = 1e10;
    let coarse = 4000usize;
    let mut best_m = lo;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=coarse {
        let m = lo * (hi / lo).powf(i as f64 / coarse as f64);
        let v = g(m);
        if v > best {
            best = v;
            best_m = m;
        }
    }
    let ratio = (hi / lo).powf(1.0 / coarse as f64);
    let (a, b) = ((best_m / ratio).max(lo), best_m * ratio);
    for i in 0..=400 {
        let m = a + (b - a) * i as f64 / 400.0;
        best = best.max(g(m));
    }
    let rhs = 16.0 * c1 * c1 / (9.0 * c3)
        * (2.0 * c1 * c2.sqrt() * std::f64::consts::E / c3).ln().powi(2);
    Ok(InequalityCheck::new(
        format!("peak(c1={c1}, c2={c2}, c3={c3})"),
        best,
        rhs,
    ))
}

/// Checks the implicit logarithmic bound: when `ln(c₁·c₂) ≥ 1`, every
/// `x > 0` with `x ≤ c₁·ln(c₂·x)` satisfies `x ≤ 2·c₁·ln(c₁·c₂)`. The
/// left side reported is the largest solution of `x = c₁·ln(c₂·x)`,
/// found by bisection.
pub fn implicit_log_bound_check(c1: f64, c2: f64) -> Result<InequalityCheck> {
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::invalid("log bound check needs positive coefficients"));
    }
    if (c1 * c2).ln() < 1.0 {
        return Err(Error::invalid(format!(
            "log bound check needs ln(c1*c2) >= 1, got {}",
            (c1 * c2).ln()
        )));
    }
    let h = |x: f64| c1 * (c2 * x).ln() - x;
    let rhs = 2.0 * c1 * (c1 * c2).ln();
    // h is concave with its maximum at x = c1; the largest solution of
    // h(x) = 0 lies right of it.
    let lhs = if h(c1) < 0.0 {
        0.0
    } else {
        let mut lo = c1;
        let mut hi = c1.max(rhs).max(1.0);
        while h(hi) > 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok(InequalityCheck::new(
        format!("implicit_log(c1={c1}, c2={c2})"),
        lhs,
        rhs,
    ))
}

/// Inputs to the worst-case bound on conservative rounds.
#[derive(Clone, Copy, Debug)]
pub struct ConservativeBoundInputs {
    pub dim: usize,
    pub param_bound: f64,
    pub feature_bound: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub delta: f64,
    pub alpha: f64,
    /// Floor on the baseline mean reward.
    pub reward_floor: f64,
    /// Floor on the baseline gap to the best action.
    pub gap_floor: f64,
}

/// Worst-case number of conservative rounds for the known-baseline policy,
/// valid when the confidence sets never fail and `lambda ≤ D²`:
///
/// ```text
/// n_T ≤ 1 + 114·d²·(B√λ + σ)² · [ln(64·d·(B√λ+σ)·D / (√(λδ)·(Δ_l + α·r_l)))]²
///           / ((Δ_l + α·r_l) · α·r_l)
/// ```
pub fn conservative_rounds_limit(inp: &ConservativeBoundInputs) -> Result<f64> {
    if inp.lambda > inp.feature_bound * inp.feature_bound {
        return Err(Error::invalid(
            "conservative-rounds bound needs lambda <= feature_bound^2",
        ));
    }
    if !(inp.alpha > 0.0 && inp.alpha < 1.0) {
        return Err(Error::invalid("bound needs alpha in (0, 1)"));
    }
    if !(inp.reward_floor > 0.0) {
        return Err(Error::invalid("bound needs a positive baseline reward floor"));
    }
    if inp.gap_floor < 0.0 {
        return Err(Error::invalid("bound needs a non-negative gap floor"));
    }
    let d = inp.dim as f64;
    let noise_scale = inp.param_bound * inp.lambda.sqrt() + inp.sigma;
    let denom = inp.gap_floor + inp.alpha * inp.reward_floor;
    let log_arg =
        64.0 * d * noise_scale * inp.feature_bound / ((inp.lambda * inp.delta).sqrt() * denom);
    let rhs = 114.0 * d * d * noise_scale * noise_scale / denom * log_arg.ln().powi(2);
    Ok(1.0 + rhs / (inp.alpha * inp.reward_floor))
}

/// Regret split by decision kind:
/// `R_T = Σ_{optimistic}(r* − r_a) + Σ_{conservative}(r* − r_b)`.
#[derive(Clone, Copy, Debug)]
pub struct RegretDecomposition {
    pub total: f64,
    pub optimistic_part: f64,
    pub conservative_part: f64,
    /// `|total − optimistic_part − conservative_part|`.
    pub identity_error: f64,
    pub conservative_rounds: usize,
}

pub fn decompose_regret(trace: &RunTrace) -> RegretDecomposition {
    let mut optimistic_part = CompensatedSum::default();
    let mut conservative_part = CompensatedSum::default();
    let mut conservative_rounds = 0;
    for r in &trace.records {
        let step = r.optimal_reward - r.expected_reward;
        match r.kind {
            DecisionKind::Optimistic => optimistic_part.add(step),
            DecisionKind::Conservative => {
                conservative_part.add(step);
                conservative_rounds += 1;
            }
        }
    }
    let total = trace.final_regret();
    let optimistic_part = optimistic_part.value();
    let conservative_part = conservative_part.value();
    RegretDecomposition {
        total,
        optimistic_part,
        conservative_part,
        identity_error: (total - (optimistic_part + conservative_part)).abs(),
        conservative_rounds,
    }
}

/// Verifies that the known-baseline conservative policy plays, on its
/// optimistic rounds, exactly the sequence the unconstrained policy would
/// produce from the same observations, and that both maintain bitwise
/// identical confidence sets along the way.
pub fn optimistic_play_matches_unconstrained(
    instance: &ProblemInstance,
    alpha: f64,
    params: &SimParams,
    key: StreamKey,
) -> Result<bool> {
    params.validate()?;
    let sched = BetaSchedule::new(
        instance.sigma,
        instance.dim,
        instance.feature_bound,
        params.lambda,
        params.delta,
        instance.param_bound,
    )?;
    let mut constrained = Clucb::new(alpha, sched)?;
    let mut unconstrained = Lucb::new(sched)?;
    let noise = NoiseModel::gaussian(instance.sigma, key)?;

    let probes: Vec<Vector<f64>> = (0..instance.dim)
        .map(|i| {
            let mut e = vec![0.0; instance.dim];
            e[i] = 1.0;
            Vector::new(e)
        })
        .collect();

    for t in 1..=params.horizon {
        let (baseline_arm, baseline_reward) = instance.baseline_action(t);
        let ctx = RoundContext {
            t,
            arms: &instance.arms,
            baseline_arm,
            baseline_reward,
        };
        let cd = constrained.decide(&ctx)?;
        let ud = unconstrained.decide(&ctx)?;
        if cd.candidate != ud.action
            || cd.candidate_value.to_bits() != ud.candidate_value.to_bits()
        {
            return Ok(false);
        }
        let y = instance.pull(t, cd.action, &noise)?;
        constrained.update(&ctx, &cd, y)?;
        if cd.kind == DecisionKind::Optimistic {
            unconstrained.update(&ctx, &ud, y)?;
            let cset = constrained.confidence_set().expect("set exists");
            let uset = unconstrained.confidence_set().expect("set exists");
            for probe in &probes {
                if cset.max_linear(probe).0.to_bits() != uset.max_linear(probe).0.to_bits() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
