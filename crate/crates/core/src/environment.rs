//! Problem instances and the reward stream.
//!
//! An instance is a fixed arm set, a hidden parameter `theta_star`, a noise
//! model and a designated baseline arm. Mean rewards are `⟨theta_star,
//! phi⟩`; pulls add noise drawn from a counter-based stream, so the sample
//! at round `t` depends only on `(seed, run, t)` and never on how many
//! times or in which order the environment was queried.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::{Error, Result, Vector};

/// Stream purpose tag: instance generation.
const PURPOSE_INSTANCE: u64 = 0;
/// Stream purpose tag: reward noise.
const PURPOSE_NOISE: u64 = 1;

/// Identifies one reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub run: u64,
}

impl StreamKey {
    pub fn new(seed: u64, run: u64) -> Self {
        StreamKey { seed, run }
    }
}

fn stream_rng(key: StreamKey, purpose: u64) -> ChaCha12Rng {
    let mut k = [0u8; 32];
    k[0..8].copy_from_slice(&key.seed.to_le_bytes());
    k[8..16].copy_from_slice(&key.run.to_le_bytes());
    k[16..24].copy_from_slice(&purpose.to_le_bytes());
    k[24..32].copy_from_slice(b"linbandt");
    ChaCha12Rng::from_seed(k)
}

/// Maps 64 random bits into the open interval (0, 1).
fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Standard normal via Box–Muller: exactly two draws, no rejection, so a
/// fixed stream offset always yields the same value.
fn standard_normal(rng: &mut impl RngCore) -> f64 {
    let u1 = unit_open(rng.next_u64());
    let u2 = unit_open(rng.next_u64());
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Noise distribution attached to an instance. Both kinds are
/// sigma-sub-Gaussian with the level reported by [`NoiseModel::sigma`]
/// (Gaussian exactly; uniform on `[-c, c]` with `sigma = c`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NoiseKind {
    Gaussian { sigma: f64 },
    BoundedUniform { half_width: f64 },
}

/// A noise source bound to one stream.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub stream: StreamKey,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64, stream: StreamKey) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!(
                "noise level must be non-negative and finite, got {sigma}"
            )));
        }
        Ok(NoiseModel {
            kind: NoiseKind::Gaussian { sigma },
            stream,
        })
    }

    pub fn bounded_uniform(half_width: f64, stream: StreamKey) -> Result<Self> {
        if !(half_width >= 0.0) || !half_width.is_finite() {
            return Err(Error::invalid(format!(
                "noise half-width must be non-negative and finite, got {half_width}"
            )));
        }
        Ok(NoiseModel {
            kind: NoiseKind::BoundedUniform { half_width },
            stream,
        })
    }

    /// Declared sub-Gaussian level.
    pub fn sigma(&self) -> f64 {
        match self.kind {
            NoiseKind::Gaussian { sigma } => sigma,
            NoiseKind::BoundedUniform { half_width } => half_width,
        }
    }

    /// The noise value for round `t`. A pure function of the stream key and
    /// `t`: each round owns a disjoint 4-word window of the cipher stream.
    pub fn sample(&self, t: usize) -> f64 {
        let mut rng = stream_rng(self.stream, PURPOSE_NOISE);
        rng.set_word_pos(t as u128 * 4);
        match self.kind {
            NoiseKind::Gaussian { sigma } => sigma * standard_normal(&mut rng),
            NoiseKind::BoundedUniform { half_width } => {
                half_width * (2.0 * unit_open(rng.next_u64()) - 1.0)
            }
        }
    }
}

/// How the baseline arm is designated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    /// The arm with the `rank`-th largest mean reward (1 = best). Mean-reward
    /// ties resolve to the lowest arm index.
    RankedArm { rank: usize },
    /// An explicit arm index.
    FixedArm { index: usize },
}

/// Baseline arm plus the reward and gap bounds the policies may rely on.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineSpec {
    pub kind: BaselineKind,
    /// Whether policies get to observe the baseline's mean reward directly.
    pub reward_known: bool,
    /// Lower bound on the baseline mean reward (strictly positive).
    pub reward_floor: f64,
    /// Upper bound on the baseline mean reward.
    pub reward_ceiling: f64,
    /// Lower bound on the baseline optimality gap.
    pub gap_floor: f64,
    /// Upper bound on the baseline optimality gap.
    pub gap_ceiling: f64,
    arm: usize,
}

impl BaselineSpec {
    /// Resolved baseline arm index.
    pub fn arm(&self) -> usize {
        self.arm
    }
}

/// Parameters for [`generate_instance`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GenerateConfig {
    /// Feature dimension.
    pub d: usize,
    /// Number of arms.
    pub k: usize,
    /// Gaussian noise level.
    pub sigma: f64,
    /// Baseline designation by mean-reward rank (1 = best arm).
    pub baseline_rank: usize,
    /// Seed for the generation stream.
    pub seed: u64,
}

/// A fixed contextual bandit instance.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub dim: usize,
    pub arms: Vec<Vector>,
    pub theta_star: Vector,
    pub sigma: f64,
    /// Declared bound on `‖theta_star‖₂`.
    pub param_bound: f64,
    /// Declared bound on `max ‖phi‖₂`.
    pub feature_bound: f64,
    pub baseline: BaselineSpec,
    /// Whether every mean reward lies in [0, 1]. Generated instances always
    /// satisfy this; hand-written files that do not still load, flagged.
    pub reward_range_ok: bool,
}

/// On-disk schema. Reward/gap bounds are derived quantities and are
/// recomputed on load rather than stored.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    d: usize,
    arms: Vec<Vec<f64>>,
    theta_star: Vec<f64>,
    sigma: f64,
    #[serde(rename = "B")]
    param_bound: f64,
    #[serde(rename = "D")]
    feature_bound: f64,
    baseline: BaselineFile,
}

#[derive(Serialize, Deserialize)]
struct BaselineFile {
    kind: String,
    rank_or_index: usize,
    reward_known: bool,
}

impl ProblemInstance {
    pub fn n_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn mean_reward(&self, arm: usize) -> f64 {
        self.theta_star.dot(&self.arms[arm])
    }

    /// Best arm and its mean reward at round `t` (the arm set is fixed, so
    /// `t` only shapes the interface). Ties go to the lowest index.
    pub fn oracle_action(&self, _t: usize) -> (usize, f64) {
        let mut best = 0;
        let mut best_mean = self.mean_reward(0);
        for a in 1..self.n_arms() {
            let m = self.mean_reward(a);
            if m > best_mean {
                best = a;
                best_mean = m;
            }
        }
        (best, best_mean)
    }

    /// Baseline arm at round `t` and its mean reward when the baseline
    /// reward is declared known.
    pub fn baseline_action(&self, _t: usize) -> (usize, Option<f64>) {
        let arm = self.baseline.arm;
        let reward = self
            .baseline
            .reward_known
            .then(|| self.mean_reward(arm));
        (arm, reward)
    }

    /// Mean reward of the baseline arm (environment-side truth, available
    /// to the harness regardless of `reward_known`).
    pub fn baseline_mean(&self) -> f64 {
        self.mean_reward(self.baseline.arm)
    }

    /// Observed reward for playing `action` at round `t` (1-based).
    pub fn pull(&self, t: usize, action: usize, noise: &NoiseModel) -> Result<f64> {
        if action >= self.n_arms() {
            return Err(Error::invalid(format!(
                "action {action} out of range for {} arms",
                self.n_arms()
            )));
        }
        if t == 0 {
            return Err(Error::invalid("rounds are 1-based"));
        }
        Ok(self.mean_reward(action) + noise.sample(t))
    }

    pub fn to_json(&self) -> String {
        let (kind, rank_or_index) = match self.baseline.kind {
            BaselineKind::RankedArm { rank } => ("ranked_arm", rank),
            BaselineKind::FixedArm { index } => ("fixed_arm", index),
        };
        let file = InstanceFile {
            d: self.dim,
            arms: self.arms.iter().map(|a| a.to_vec()).collect(),
            theta_star: self.theta_star.to_vec(),
            sigma: self.sigma,
            param_bound: self.param_bound,
            feature_bound: self.feature_bound,
            baseline: BaselineFile {
                kind: kind.to_string(),
                rank_or_index,
                reward_known: self.baseline.reward_known,
            },
        };
        serde_json::to_string_pretty(&file).expect("instance serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let field_err = |field: &str, message: String| Error::Parse {
            line: 0,
            column: 0,
            message: format!("field `{field}`: {message}"),
        };

        if file.d == 0 {
            return Err(field_err("d", "dimension must be positive".into()));
        }
        if file.arms.is_empty() {
            return Err(field_err("arms", "at least one arm required".into()));
        }
        if file.theta_star.len() != file.d {
            return Err(field_err(
                "theta_star",
                format!("length {} does not match d = {}", file.theta_star.len(), file.d),
            ));
        }
        for (i, arm) in file.arms.iter().enumerate() {
            if arm.len() != file.d {
                return Err(field_err(
                    "arms",
                    format!("arm {i} has length {}, expected d = {}", arm.len(), file.d),
                ));
            }
        }
        if !(file.sigma >= 0.0) || !file.sigma.is_finite() {
            return Err(field_err("sigma", "must be non-negative and finite".into()));
        }

        let theta_star = Vector::new(file.theta_star);
        let arms: Vec<Vector> = file.arms.into_iter().map(Vector::new).collect();

        let theta_norm = theta_star.norm();
        if theta_norm > file.param_bound * (1.0 + 1e-9) {
            return Err(field_err(
                "B",
                format!("‖theta_star‖ = {theta_norm} exceeds declared bound {}", file.param_bound),
            ));
        }
        for (i, arm) in arms.iter().enumerate() {
            let n = arm.norm();
            if n > file.feature_bound * (1.0 + 1e-9) {
                return Err(field_err(
                    "D",
                    format!("‖arm {i}‖ = {n} exceeds declared bound {}", file.feature_bound),
                ));
            }
        }

        let kind = match file.baseline.kind.as_str() {
            "ranked_arm" => BaselineKind::RankedArm {
                rank: file.baseline.rank_or_index,
            },
            "fixed_arm" => BaselineKind::FixedArm {
                index: file.baseline.rank_or_index,
            },
            other => {
                return Err(field_err(
                    "baseline.kind",
                    format!("unknown kind `{other}` (expected ranked_arm or fixed_arm)"),
                ))
            }
        };
        let baseline = derive_baseline(kind, file.baseline.reward_known, &arms, &theta_star)?;

        let reward_range_ok = arms
            .iter()
            .all(|a| (0.0..=1.0 + 1e-12).contains(&theta_star.dot(a)));
        if !reward_range_ok {
            log::warn!("instance has mean rewards outside [0, 1]");
        }

        Ok(ProblemInstance {
            dim: file.d,
            arms,
            theta_star,
            sigma: file.sigma,
            param_bound: file.param_bound,
            feature_bound: file.feature_bound,
            baseline,
            reward_range_ok,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Resolves the baseline arm and fills the reward/gap bounds the tightest
/// way a fixed arm set allows: `reward_floor = reward_ceiling = r_b`,
/// `gap_floor = 0`, `gap_ceiling = best mean − r_b`.
fn derive_baseline(
    kind: BaselineKind,
    reward_known: bool,
    arms: &[Vector],
    theta_star: &Vector,
) -> Result<BaselineSpec> {
    let k = arms.len();
    let means: Vec<f64> = arms.iter().map(|a| theta_star.dot(a)).collect();
    let arm = match kind {
        BaselineKind::RankedArm { rank } => {
            if rank == 0 || rank > k {
                return Err(Error::invalid(format!(
                    "baseline rank {rank} out of range for {k} arms"
                )));
            }
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| {
                means[b].partial_cmp(&means[a]).expect("finite means").then(a.cmp(&b))
            });
            order[rank - 1]
        }
        BaselineKind::FixedArm { index } => {
            if index >= k {
                return Err(Error::invalid(format!(
                    "baseline arm index {index} out of range for {k} arms"
                )));
            }
            index
        }
    };
    let r_b = means[arm];
    if !(r_b > 0.0) {
        return Err(Error::invalid(format!(
            "baseline arm {arm} has non-positive mean reward {r_b}"
        )));
    }
    let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(BaselineSpec {
        kind,
        reward_known,
        reward_floor: r_b,
        reward_ceiling: r_b,
        gap_floor: 0.0,
        gap_ceiling: best - r_b,
        arm,
    })
}

/// Draws an instance in the standard Gaussian family: `theta` and each arm
/// from `N(0, I_d)`, each arm redrawn until its mean reward is strictly
/// positive, then `theta_star = theta / max mean` so the best mean reward
/// is exactly 1. `param_bound` and `feature_bound` are set to the realized
/// norms. The same seed always yields the same instance.
pub fn generate_instance(cfg: &GenerateConfig) -> Result<ProblemInstance> {
    const MAX_REJECTIONS: usize = 1000;

    if cfg.d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if cfg.k == 0 {
        return Err(Error::invalid("arm count must be positive"));
    }
    if !(cfg.sigma >= 0.0) || !cfg.sigma.is_finite() {
        return Err(Error::invalid(format!(
            "noise level must be non-negative and finite, got {}",
            cfg.sigma
        )));
    }
    if cfg.baseline_rank == 0 || cfg.baseline_rank > cfg.k {
        return Err(Error::invalid(format!(
            "baseline rank {} out of range for {} arms",
            cfg.baseline_rank, cfg.k
        )));
    }

    let mut rng = stream_rng(StreamKey::new(cfg.seed, 0), PURPOSE_INSTANCE);
    let gauss_vec =
        |rng: &mut ChaCha12Rng| Vector::new((0..cfg.d).map(|_| standard_normal(rng)).collect());

    let mut theta = gauss_vec(&mut rng);
    let mut guard = 0;
    while theta.norm() == 0.0 {
        theta = gauss_vec(&mut rng);
        guard += 1;
        if guard > MAX_REJECTIONS {
            return Err(Error::GenerationFailed {
                attempts: MAX_REJECTIONS,
            });
        }
    }

    let mut arms = Vec::with_capacity(cfg.k);
    for _ in 0..cfg.k {
        let mut attempts = 0;
        let arm = loop {
            let candidate = gauss_vec(&mut rng);
            if theta.dot(&candidate) > 0.0 {
                break candidate;
            }
            attempts += 1;
            if attempts >= MAX_REJECTIONS {
                return Err(Error::GenerationFailed {
                    attempts: MAX_REJECTIONS,
                });
            }
        };
        arms.push(arm);
    }

    let max_mean = arms
        .iter()
        .map(|a| theta.dot(a))
        .fold(f64::NEG_INFINITY, f64::max);
    let theta_star = theta.scaled(1.0 / max_mean);

    let param_bound = theta_star.norm();
    let feature_bound = arms.iter().map(Vector::norm).fold(0.0, f64::max);
    let baseline = derive_baseline(
        BaselineKind::RankedArm {
            rank: cfg.baseline_rank,
        },
        true,
        &arms,
        &theta_star,
    )?;

    let instance = ProblemInstance {
        dim: cfg.d,
        arms,
        theta_star,
        sigma: cfg.sigma,
        param_bound,
        feature_bound,
        baseline,
        reward_range_ok: true,
    };
    debug_assert!(instance
        .arms
        .iter()
        .all(|a| {
            let m = instance.theta_star.dot(a);
            m > 0.0 && m <= 1.0 + 1e-12
        }));
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(v: &Vector) -> Vec<u64> {
        v.iter().map(|x| x.to_bits()).collect()
    }

    fn small_config(seed: u64) -> GenerateConfig {
        GenerateConfig {
            d: 4,
            k: 20,
            sigma: 1.0,
            baseline_rank: 5,
            seed,
        }
    }

    #[test]
    fn generated_instances_satisfy_assumptions() {
        for seed in 0..20 {
            let inst = generate_instance(&small_config(seed)).unwrap();
            assert_eq!(inst.dim, 4);
            assert_eq!(inst.n_arms(), 20);
            let mut best = f64::NEG_INFINITY;
            for a in 0..inst.n_arms() {
                let m = inst.mean_reward(a);
                assert!(m > 0.0, "seed {seed}: mean {m} not positive");
                assert!(m <= 1.0 + 1e-12);
                best = best.max(m);
                assert!(inst.arms[a].norm() <= inst.feature_bound + 1e-12);
            }
            assert!((best - 1.0).abs() < 1e-12, "best mean {best}");
            assert!((inst.theta_star.norm() - inst.param_bound).abs() < 1e-12);
            assert!(inst.reward_range_ok);

            let b = &inst.baseline;
            let r_b = inst.baseline_mean();
            assert!(b.reward_floor > 0.0);
            assert!(b.reward_floor <= r_b && r_b <= b.reward_ceiling);
            let gap = best - r_b;
            assert!(b.gap_floor <= gap + 1e-12 && gap <= b.gap_ceiling + 1e-12);
        }
    }

    #[test]
    fn ranked_baseline_counts_from_the_top() {
        let inst = generate_instance(&small_config(3)).unwrap();
        let mut means: Vec<f64> = (0..inst.n_arms()).map(|a| inst.mean_reward(a)).collect();
        means.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((inst.baseline_mean() - means[4]).abs() < 1e-12);

        // Rank 1 designates the optimal arm and leaves no gap headroom.
        let mut cfg = small_config(3);
        cfg.baseline_rank = 1;
        let inst = generate_instance(&cfg).unwrap();
        let (oracle, best_mean) = inst.oracle_action(1);
        assert_eq!(inst.baseline.arm(), oracle);
        assert!((inst.baseline.gap_ceiling).abs() < 1e-12);
        assert!((best_mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generation_validates_arguments() {
        let mut cfg = small_config(0);
        cfg.baseline_rank = 21;
        assert!(matches!(
            generate_instance(&cfg),
            Err(Error::InvalidArgument(_))
        ));
        cfg = small_config(0);
        cfg.d = 0;
        assert!(generate_instance(&cfg).is_err());
        cfg = small_config(0);
        cfg.sigma = -1.0;
        assert!(generate_instance(&cfg).is_err());
    }

    #[test]
    fn generation_is_reproducible() {
        let a = generate_instance(&small_config(11)).unwrap();
        let b = generate_instance(&small_config(11)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = generate_instance(&small_config(12)).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn pull_is_deterministic_per_round() {
        let inst = generate_instance(&small_config(7)).unwrap();
        let noise = NoiseModel::gaussian(inst.sigma, StreamKey::new(99, 2)).unwrap();
        let y1 = inst.pull(5, 3, &noise).unwrap();
        let y2 = inst.pull(5, 3, &noise).unwrap();
        assert_eq!(y1.to_bits(), y2.to_bits());
        let y3 = inst.pull(6, 3, &noise).unwrap();
        assert_ne!(y1, y3);
        // Same round, different action: identical noise, different mean.
        let y4 = inst.pull(5, 4, &noise).unwrap();
        let eta1 = y1 - inst.mean_reward(3);
        let eta4 = y4 - inst.mean_reward(4);
        assert!((eta1 - eta4).abs() < 1e-12);

        assert!(inst.pull(5, 20, &noise).is_err());
        assert!(inst.pull(0, 3, &noise).is_err());
    }

    #[test]
    fn noise_free_pulls_return_the_mean() {
        let mut cfg = small_config(4);
        cfg.sigma = 0.0;
        let inst = generate_instance(&cfg).unwrap();
        let noise = NoiseModel::gaussian(0.0, StreamKey::new(1, 0)).unwrap();
        for t in 1..50 {
            let y = inst.pull(t, 2, &noise).unwrap();
            assert_eq!(y, inst.mean_reward(2));
        }
    }

    #[test]
    fn sample_mean_approaches_the_mean_reward() {
        let inst = generate_instance(&small_config(8)).unwrap();
        let noise = NoiseModel::gaussian(1.0, StreamKey::new(123, 0)).unwrap();
        let n = 100_000;
        let mut sum = 0.0;
        for t in 1..=n {
            sum += inst.pull(t, 0, &noise).unwrap();
        }
        let mean = sum / n as f64;
        let tol = 3.0 * inst.sigma / (n as f64).sqrt();
        assert!(
            (mean - inst.mean_reward(0)).abs() <= tol,
            "sample mean {mean} vs {} (tol {tol})",
            inst.mean_reward(0)
        );
    }

    #[test]
    fn bounded_uniform_noise_stays_in_range() {
        let noise = NoiseModel::bounded_uniform(0.3, StreamKey::new(5, 0)).unwrap();
        assert_eq!(noise.sigma(), 0.3);
        for t in 1..2000 {
            let e = noise.sample(t);
            assert!((-0.3..=0.3).contains(&e));
        }
    }

    #[test]
    fn parallel_streams_are_uncorrelated() {
        let a = NoiseModel::gaussian(1.0, StreamKey::new(42, 0)).unwrap();
        let b = NoiseModel::gaussian(1.0, StreamKey::new(42, 1)).unwrap();
        let n = 10_000;
        let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for t in 1..=n {
            let x = a.sample(t);
            let y = b.sample(t);
            sa += x;
            sb += y;
            saa += x * x;
            sbb += y * y;
            sab += x * y;
        }
        let nf = n as f64;
        let cov = sab / nf - (sa / nf) * (sb / nf);
        let var_a = saa / nf - (sa / nf) * (sa / nf);
        let var_b = sbb / nf - (sb / nf) * (sb / nf);
        let corr = cov / (var_a * var_b).sqrt();
        assert!(corr.abs() < 0.05, "correlation {corr}");
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let inst = generate_instance(&small_config(21)).unwrap();
        let text = inst.to_json();
        let back = ProblemInstance::from_json(&text).unwrap();
        assert_eq!(back.dim, inst.dim);
        assert_eq!(bits(&back.theta_star), bits(&inst.theta_star));
        for (a, b) in back.arms.iter().zip(inst.arms.iter()) {
            assert_eq!(bits(a), bits(b));
        }
        assert_eq!(back.sigma.to_bits(), inst.sigma.to_bits());
        assert_eq!(back.param_bound.to_bits(), inst.param_bound.to_bits());
        assert_eq!(back.feature_bound.to_bits(), inst.feature_bound.to_bits());
        assert_eq!(back.baseline, inst.baseline);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn hand_written_instance_loads_and_validates() {
        let text = r#"{
            "d": 1,
            "arms": [[1.0], [0.5]],
            "theta_star": [1.0],
            "sigma": 0.1,
            "B": 1.0,
            "D": 1.0,
            "baseline": {"kind": "fixed_arm", "rank_or_index": 1, "reward_known": true}
        }"#;
        let inst = ProblemInstance::from_json(text).unwrap();
        assert_eq!(inst.baseline.arm(), 1);
        assert!((inst.baseline_mean() - 0.5).abs() < 1e-15);
        assert!(inst.reward_range_ok);
        assert_eq!(inst.oracle_action(1), (0, 1.0));
    }

    #[test]
    fn malformed_files_name_the_problem() {
        let bad_json = "{ not json";
        match ProblemInstance::from_json(bad_json) {
            Err(Error::Parse { line, .. }) => assert!(line >= 1),
            other => panic!("expected parse error, got {other:?}"),
        }

        let wrong_len = r#"{
            "d": 2,
            "arms": [[1.0, 0.0]],
            "theta_star": [1.0, 0.0, 0.0],
            "sigma": 1.0,
            "B": 1.0,
            "D": 1.0,
            "baseline": {"kind": "fixed_arm", "rank_or_index": 0, "reward_known": true}
        }"#;
        match ProblemInstance::from_json(wrong_len) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("theta_star")),
            other => panic!("expected parse error, got {other:?}"),
        }

        let bad_bound = r#"{
            "d": 1,
            "arms": [[1.0]],
            "theta_star": [2.0],
            "sigma": 1.0,
            "B": 1.0,
            "D": 1.0,
            "baseline": {"kind": "fixed_arm", "rank_or_index": 0, "reward_known": true}
        }"#;
        match ProblemInstance::from_json(bad_bound) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("B")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn save_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("instance.json");
        let inst = generate_instance(&small_config(30)).unwrap();
        inst.save(&path).unwrap();
        let back = ProblemInstance::load(&path).unwrap();
        assert_eq!(back.to_json(), inst.to_json());
    }
}
