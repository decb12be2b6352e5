//! Decision policies.
//!
//! All policies expose the same two-phase interface: [`Policy::decide`]
//! picks an action from the current confidence set without touching state,
//! [`Policy::update`] feeds the observed reward back. The conservative
//! policies guard a cumulative constraint: with probability `1 − delta`,
//!
//! ```text
//! Σ_{i ≤ t} reward(a_i)  ≥  (1 − alpha) · Σ_{i ≤ t} reward(b_i)    for all t
//! ```
//!
//! against the baseline actions `b_i`. [`Clucb`] checks the constraint with
//! known baseline rewards and estimates only from optimistic rounds;
//! [`Clucb2`] bounds both sides through the confidence set, needs only a
//! floor on the baseline reward, and estimates from every round. Ties in
//! the optimistic argmax always resolve to the lowest arm index.

use crate::confidence::{BetaSchedule, BetaVariant, ConfidenceSet, RlsState};
use crate::linalg::Vector;
use crate::scalar::Real;
use crate::{Error, Result};

/// What a policy sees at the start of a round.
#[derive(Clone, Copy, Debug)]
pub struct RoundContext<'a, F> {
    /// 1-based round index.
    pub t: usize,
    /// Feature vectors of the available actions this round.
    pub arms: &'a [Vector<F>],
    /// Index of the baseline action for this round.
    pub baseline_arm: usize,
    /// Baseline mean reward, when the environment declares it known.
    pub baseline_reward: Option<F>,
}

/// Whether the played action came from the optimistic candidate or the
/// baseline fallback.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecisionKind {
    Optimistic,
    Conservative,
}

/// Outcome of one [`Policy::decide`] call.
#[derive(Clone, Debug)]
pub struct Decision<F> {
    /// Action to play.
    pub action: usize,
    pub kind: DecisionKind,
    /// Worst-case cumulative value of committing to the candidate, when the
    /// policy ran a safety check.
    pub pessimistic_value: Option<F>,
    /// Optimistic cumulative baseline value the check compared against
    /// (only `Clucb2` needs one).
    pub baseline_optimistic_value: Option<F>,
    /// The optimistic candidate, played or not.
    pub candidate: usize,
    /// Optimistic value of the candidate.
    pub candidate_value: F,
}

/// Uniform driving interface for the simulation harness.
pub trait Policy<F: Real>: Send {
    fn name(&self) -> &'static str;

    /// Picks the action for round `ctx.t`. Pure: repeated calls with the
    /// same context return the same decision.
    fn decide(&self, ctx: &RoundContext<F>) -> Result<Decision<F>>;

    /// Feeds back the observed reward `y` for the action in `decision`.
    /// Must be called exactly once per decided round. `Clucb` discards the
    /// observation on conservative rounds; everyone else consumes it.
    fn update(&mut self, ctx: &RoundContext<F>, decision: &Decision<F>, y: F) -> Result<()>;

    /// Current confidence set, for policies that maintain one.
    fn confidence_set(&self) -> Option<&ConfidenceSet<F>> {
        None
    }
}

fn check_arms<F: Real>(arms: &[Vector<F>], dim: usize) -> Result<()> {
    if arms.is_empty() {
        return Err(Error::invalid("action set must not be empty"));
    }
    for (i, arm) in arms.iter().enumerate() {
        if arm.dim() != dim {
            return Err(Error::invalid(format!(
                "arm {i} has dimension {}, expected {dim}",
                arm.dim()
            )));
        }
    }
    Ok(())
}

/// Optimistic candidate: the arm with the largest set-maximum of
/// `⟨theta, phi⟩`, lowest index on ties.
fn best_optimistic<F: Real>(conf: &ConfidenceSet<F>, arms: &[Vector<F>]) -> (usize, F) {
    let mut best = 0;
    let mut best_value = F::neg_infinity();
    for (a, phi) in arms.iter().enumerate() {
        let (value, _) = conf.max_linear(phi);
        if value > best_value {
            best = a;
            best_value = value;
        }
    }
    (best, best_value)
}

fn check_alpha<F: Real>(alpha: F) -> Result<()> {
    if !(alpha > F::zero() && alpha < F::one()) {
        return Err(Error::invalid(format!(
            "alpha must lie strictly in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// Unconstrained optimism: play the optimistic candidate every round.
///
/// Starts from the ball `‖theta‖ ≤ param_bound` and rebuilds the ellipsoid
/// after every observation.
pub struct Lucb<F> {
    sched: BetaSchedule<F>,
    rls: RlsState<F>,
    conf: ConfidenceSet<F>,
}

impl<F: Real> Lucb<F> {
    pub fn new(sched: BetaSchedule<F>) -> Result<Self> {
        Ok(Lucb {
            sched,
            rls: RlsState::with_feature_bound(sched.dim, sched.lambda, sched.feature_bound)?,
            conf: ConfidenceSet::ball(sched.param_bound),
        })
    }

    pub fn rounds_played(&self) -> usize {
        self.rls.samples()
    }
}

impl<F: Real> Policy<F> for Lucb<F> {
    fn name(&self) -> &'static str {
        "lucb"
    }

    fn decide(&self, ctx: &RoundContext<F>) -> Result<Decision<F>> {
        check_arms(ctx.arms, self.sched.dim)?;
        let (candidate, candidate_value) = best_optimistic(&self.conf, ctx.arms);
        Ok(Decision {
            action: candidate,
            kind: DecisionKind::Optimistic,
            pessimistic_value: None,
            baseline_optimistic_value: None,
            candidate,
            candidate_value,
        })
    }

    fn update(&mut self, ctx: &RoundContext<F>, decision: &Decision<F>, y: F) -> Result<()> {
        self.rls.ingest(&ctx.arms[decision.action], y)?;
        self.conf = ConfidenceSet::ellipsoid(
            self.rls.estimate(),
            self.rls.spd().clone(),
            self.sched
                .beta_next(self.rls.samples(), BetaVariant::Clucb),
            None,
        );
        Ok(())
    }

    fn confidence_set(&self) -> Option<&ConfidenceSet<F>> {
        Some(&self.conf)
    }
}

/// Conservative optimism with known baseline rewards.
///
/// Plays the optimistic candidate only when its worst-case cumulative value
/// plus the baseline reward already banked on conservative rounds clears
/// `(1 − alpha)` of the full baseline cumulative through the current round;
/// otherwise falls back to the baseline arm and discards the observation.
pub struct Clucb<F> {
    alpha: F,
    sched: BetaSchedule<F>,
    rls: RlsState<F>,
    conf: ConfidenceSet<F>,
    /// Sum of features played on optimistic rounds.
    played_sum: Vector<F>,
    conservative_rounds: usize,
    /// Baseline reward banked on conservative rounds.
    conservative_baseline_total: F,
    /// Baseline reward across all elapsed rounds.
    baseline_total: F,
}

impl<F: Real> Clucb<F> {
    pub fn new(alpha: F, sched: BetaSchedule<F>) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Clucb {
            alpha,
            sched,
            rls: RlsState::with_feature_bound(sched.dim, sched.lambda, sched.feature_bound)?,
            conf: ConfidenceSet::ball(sched.param_bound),
            played_sum: Vector::zeros(sched.dim),
            conservative_rounds: 0,
            conservative_baseline_total: F::zero(),
            baseline_total: F::zero(),
        })
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    /// Rounds spent on the baseline so far.
    pub fn conservative_rounds(&self) -> usize {
        self.conservative_rounds
    }

    /// Rounds played optimistically so far.
    pub fn optimistic_rounds(&self) -> usize {
        self.rls.samples()
    }

    fn known_baseline_reward(&self, ctx: &RoundContext<F>) -> Result<F> {
        ctx.baseline_reward.ok_or_else(|| {
            Error::invalid("clucb needs the baseline reward; this environment withholds it")
        })
    }
}

impl<F: Real> Policy<F> for Clucb<F> {
    fn name(&self) -> &'static str {
        "clucb"
    }

    fn decide(&self, ctx: &RoundContext<F>) -> Result<Decision<F>> {
        check_arms(ctx.arms, self.sched.dim)?;
        let r_b = self.known_baseline_reward(ctx)?;
        let (candidate, candidate_value) = best_optimistic(&self.conf, ctx.arms);

        let committed = self.played_sum.plus(&ctx.arms[candidate]);
        let (pessimistic, _) = self.conf.min_linear(&committed);
        let lhs = pessimistic + self.conservative_baseline_total;
        let rhs = (F::one() - self.alpha) * (self.baseline_total + r_b);

        let (action, kind) = if lhs >= rhs {
            (candidate, DecisionKind::Optimistic)
        } else {
            (ctx.baseline_arm, DecisionKind::Conservative)
        };
        Ok(Decision {
            action,
            kind,
            pessimistic_value: Some(pessimistic),
            baseline_optimistic_value: None,
            candidate,
            candidate_value,
        })
    }

    fn update(&mut self, ctx: &RoundContext<F>, decision: &Decision<F>, y: F) -> Result<()> {
        let r_b = self.known_baseline_reward(ctx)?;
        self.baseline_total = self.baseline_total + r_b;
        match decision.kind {
            DecisionKind::Optimistic => {
                self.rls.ingest(&ctx.arms[decision.action], y)?;
                self.played_sum.add_in_place(&ctx.arms[decision.action]);
                self.conf = ConfidenceSet::ellipsoid(
                    self.rls.estimate(),
                    self.rls.spd().clone(),
                    self.sched
                        .beta_next(self.rls.samples(), BetaVariant::Clucb),
                    None,
                );
            }
            DecisionKind::Conservative => {
                // Baseline round: the observation is discarded and the
                // confidence set carries over unchanged.
                self.conservative_rounds += 1;
                self.conservative_baseline_total = self.conservative_baseline_total + r_b;
            }
        }
        Ok(())
    }

    fn confidence_set(&self) -> Option<&ConfidenceSet<F>> {
        Some(&self.conf)
    }
}

/// Conservative optimism with unknown baseline rewards.
///
/// Both sides of the safety check come from the confidence set: the
/// candidate side is bounded below, the baseline side above, and the reward
/// banked on conservative rounds is credited through the larger of its
/// set-minimum and `count · reward_floor`. Every observation, baseline
/// rounds included, feeds the estimator.
pub struct Clucb2<F> {
    alpha: F,
    reward_floor: F,
    sched: BetaSchedule<F>,
    strict_nested: bool,
    rls: RlsState<F>,
    conf: ConfidenceSet<F>,
    /// Sum of features played on optimistic rounds.
    played_sum: Vector<F>,
    /// Sum of baseline features over conservative rounds.
    conservative_baseline_sum: Vector<F>,
    /// Sum of baseline features over optimistic rounds.
    optimistic_baseline_sum: Vector<F>,
    conservative_rounds: usize,
}

impl<F: Real> Clucb2<F> {
    pub fn new(alpha: F, reward_floor: F, sched: BetaSchedule<F>, strict_nested: bool) -> Result<Self> {
        check_alpha(alpha)?;
        if !(reward_floor > F::zero()) || !reward_floor.is_finite() {
            return Err(Error::invalid(format!(
                "baseline reward floor must be positive and finite, got {reward_floor}"
            )));
        }
        Ok(Clucb2 {
            alpha,
            reward_floor,
            sched,
            strict_nested,
            rls: RlsState::with_feature_bound(sched.dim, sched.lambda, sched.feature_bound)?,
            conf: ConfidenceSet::ball(sched.param_bound),
            played_sum: Vector::zeros(sched.dim),
            conservative_baseline_sum: Vector::zeros(sched.dim),
            optimistic_baseline_sum: Vector::zeros(sched.dim),
            conservative_rounds: 0,
        })
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    pub fn conservative_rounds(&self) -> usize {
        self.conservative_rounds
    }

    pub fn rounds_seen(&self) -> usize {
        self.rls.samples()
    }
}

impl<F: Real> Policy<F> for Clucb2<F> {
    fn name(&self) -> &'static str {
        "clucb2"
    }

    fn decide(&self, ctx: &RoundContext<F>) -> Result<Decision<F>> {
        check_arms(ctx.arms, self.sched.dim)?;
        if ctx.baseline_arm >= ctx.arms.len() {
            return Err(Error::invalid(format!(
                "baseline arm {} out of range",
                ctx.baseline_arm
            )));
        }
        let (candidate, candidate_value) = best_optimistic(&self.conf, ctx.arms);
        let phi_b = &ctx.arms[ctx.baseline_arm];

        let committed = self.played_sum.plus(&ctx.arms[candidate]);
        let (committed_min, _) = self.conf.min_linear(&committed);
        let (banked_min, _) = self.conf.min_linear(&self.conservative_baseline_sum);
        let floor_credit = F::of_usize(self.conservative_rounds) * self.reward_floor;
        let pessimistic = committed_min + self.alpha * banked_min.max(floor_credit);

        let (baseline_max, _) = self
            .conf
            .max_linear(&self.optimistic_baseline_sum.plus(phi_b));

        let (action, kind) = if pessimistic >= (F::one() - self.alpha) * baseline_max {
            (candidate, DecisionKind::Optimistic)
        } else {
            (ctx.baseline_arm, DecisionKind::Conservative)
        };
        Ok(Decision {
            action,
            kind,
            pessimistic_value: Some(pessimistic),
            baseline_optimistic_value: Some(baseline_max),
            candidate,
            candidate_value,
        })
    }

    fn update(&mut self, ctx: &RoundContext<F>, decision: &Decision<F>, y: F) -> Result<()> {
        let phi_played = &ctx.arms[decision.action];
        let phi_b = &ctx.arms[ctx.baseline_arm];
        self.rls.ingest(phi_played, y)?;
        match decision.kind {
            DecisionKind::Optimistic => {
                self.played_sum.add_in_place(phi_played);
                self.optimistic_baseline_sum.add_in_place(phi_b);
            }
            DecisionKind::Conservative => {
                self.conservative_baseline_sum.add_in_place(phi_b);
                self.conservative_rounds += 1;
            }
        }
        // The set built after round t carries the radius indexed by the
        // round at which it is used, t + 1.
        self.conf = ConfidenceSet::ellipsoid(
            self.rls.estimate(),
            self.rls.spd().clone(),
            self.sched
                .beta_next(self.rls.samples() + 1, BetaVariant::Clucb2),
            self.strict_nested.then_some(self.sched.param_bound),
        );
        Ok(())
    }

    fn confidence_set(&self) -> Option<&ConfidenceSet<F>> {
        Some(&self.conf)
    }
}

/// Reference policy: plays the best arm by true mean reward every round.
/// Built by the harness with privileged access to the hidden parameter.
pub struct OraclePolicy<F> {
    theta_star: Vector<F>,
}

impl<F: Real> OraclePolicy<F> {
    pub fn new(theta_star: Vector<F>) -> Self {
        OraclePolicy { theta_star }
    }
}

impl<F: Real> Policy<F> for OraclePolicy<F> {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn decide(&self, ctx: &RoundContext<F>) -> Result<Decision<F>> {
        check_arms(ctx.arms, self.theta_star.dim())?;
        let mut best = 0;
        let mut best_mean = F::neg_infinity();
        for (a, phi) in ctx.arms.iter().enumerate() {
            let m = self.theta_star.dot(phi);
            if m > best_mean {
                best = a;
                best_mean = m;
            }
        }
        Ok(Decision {
            action: best,
            kind: DecisionKind::Optimistic,
            pessimistic_value: None,
            baseline_optimistic_value: None,
            candidate: best,
            candidate_value: best_mean,
        })
    }

    fn update(&mut self, _ctx: &RoundContext<F>, _decision: &Decision<F>, _y: F) -> Result<()> {
        Ok(())
    }
}

/// Reference policy: plays the baseline arm every round.
pub struct BaselineFollower;

impl<F: Real> Policy<F> for BaselineFollower {
    fn name(&self) -> &'static str {
        "baseline"
    }

    fn decide(&self, ctx: &RoundContext<F>) -> Result<Decision<F>> {
        if ctx.arms.is_empty() {
            return Err(Error::invalid("action set must not be empty"));
        }
        if ctx.baseline_arm >= ctx.arms.len() {
            return Err(Error::invalid(format!(
                "baseline arm {} out of range",
                ctx.baseline_arm
            )));
        }
        Ok(Decision {
            action: ctx.baseline_arm,
            kind: DecisionKind::Conservative,
            pessimistic_value: None,
            baseline_optimistic_value: None,
            candidate: ctx.baseline_arm,
            candidate_value: F::zero(),
        })
    }

    fn update(&mut self, _ctx: &RoundContext<F>, _decision: &Decision<F>, _y: F) -> Result<()> {
        Ok(())
    }
}
