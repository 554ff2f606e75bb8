//! Allocation policies behind a single select/update interface.
//!
//! The main policy is the strict-rate-constrained UCB: classical UCB1 plus a
//! hard floor on how often every arm must be selected. At round `t` each arm
//! owes `floor(v * t)` cumulative pulls for the configured minimum rate `v`;
//! any arm behind that quota pre-empts the UCB choice (most-starved first,
//! ties to the lowest index). With `v = 0` the constraint never fires and the
//! policy is exactly UCB1.
//!
//! Round-robin, epsilon-greedy, uniform-random, and a true-mean oracle are
//! included as baselines for the experiment harness.

use rand::Rng;
use std::fmt;

use crate::error::{Error, Result};
use crate::rate::Rate;

/// Index of one selectable recipient (one teammate).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArmId(pub usize);

impl ArmId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Per-arm observation memory: how often the arm was selected and the sum of
/// its observed rewards (each in `[0, 1]`, so `reward_sum <= pull_count`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArmStats {
    pulls: u64,
    reward_sum: f64,
}

impl ArmStats {
    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn reward_sum(&self) -> f64 {
        self.reward_sum
    }

    /// Empirical mean reward; undefined before the first pull.
    pub fn mean(&self) -> Option<f64> {
        (self.pulls > 0).then(|| self.reward_sum / self.pulls as f64)
    }

    fn record(&mut self, reward: f64) {
        self.pulls += 1;
        self.reward_sum += reward;
    }
}

/// Fairness and exploration knobs shared by the UCB-family policies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FairnessParams {
    /// Minimum selection rate `v` every arm is owed.
    pub min_rate: Rate,
    /// Scale of the UCB exploration bonus `sqrt(coeff * ln t / n)`.
    pub exploration_coeff: f64,
}

impl FairnessParams {
    pub const DEFAULT_EXPLORATION_COEFF: f64 = 2.0;

    pub fn new(min_rate: Rate, exploration_coeff: f64) -> Self {
        FairnessParams {
            min_rate,
            exploration_coeff,
        }
    }
}

impl Default for FairnessParams {
    fn default() -> Self {
        FairnessParams {
            min_rate: Rate::ZERO,
            exploration_coeff: Self::DEFAULT_EXPLORATION_COEFF,
        }
    }
}

/// Which selection rule a [`PolicyState`] runs.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicyKind {
    /// UCB1 with the strict minimum-rate constraint.
    StrictRateUcb,
    /// Unconstrained UCB1.
    Ucb1,
    /// Cycles through the arms in index order.
    RoundRobin,
    /// Explores uniformly with probability `epsilon`, otherwise exploits the
    /// empirical-mean argmax (unpulled arms score 0).
    EpsilonGreedy { epsilon: f64 },
    /// Uniform draw every round.
    UniformRandom,
    /// Always plays the argmax of the environment's true means, provided at
    /// construction. Realizes the zero-regret comparator.
    Oracle { true_means: Vec<f64> },
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::StrictRateUcb => "strict_rate_ucb",
            PolicyKind::Ucb1 => "ucb1",
            PolicyKind::RoundRobin => "round_robin",
            PolicyKind::EpsilonGreedy { .. } => "epsilon_greedy",
            PolicyKind::UniformRandom => "uniform",
            PolicyKind::Oracle { .. } => "oracle",
        }
    }
}

/// Why an arm was chosen. Feeds the temporal analyses of allocation traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecisionReason {
    /// Arm had never been pulled; every arm is tried once first.
    Initialization,
    /// Arm was below its quota and pre-empted the UCB choice.
    FairnessOverride,
    /// Arm maximized the UCB index.
    UcbExploit,
    /// Chosen by a baseline rule.
    Baseline,
}

impl fmt::Display for DecisionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DecisionReason::Initialization => "Initialization",
            DecisionReason::FairnessOverride => "FairnessOverride",
            DecisionReason::UcbExploit => "UcbExploit",
            DecisionReason::Baseline => "Baseline",
        };
        f.write_str(s)
    }
}

/// One selection with the rule that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub arm: ArmId,
    pub reason: DecisionReason,
}

/// UCB index for one arm at the round about to be played:
/// `mean + sqrt(coeff * ln(round) / pulls)`, or `+inf` for an unpulled arm so
/// that initialization always wins.
pub fn ucb_index(stats: &ArmStats, round: u64, exploration_coeff: f64) -> f64 {
    assert!(round >= 1, "ucb_index needs a positive round");
    match stats.mean() {
        None => f64::INFINITY,
        Some(mean) => {
            let bonus =
                (exploration_coeff * (round as f64).ln() / stats.pulls as f64).sqrt();
            mean + bonus
        }
    }
}

/// Cumulative pulls owed to every arm by round `round`: `floor(v * round)`,
/// computed in integer arithmetic so quota boundaries are exact.
pub fn required_pulls(round: u64, min_rate: Rate) -> u64 {
    ((min_rate.numer() as u128 * round as u128) / min_rate.denom() as u128) as u64
}

/// Arms currently behind quota for the round about to be played, with their
/// deficits, ordered most-starved first (ties to the lowest index).
pub fn starving_set(counts: &[u64], round: u64, min_rate: Rate) -> Vec<(ArmId, u64)> {
    let quota = required_pulls(round, min_rate);
    let mut starving: Vec<(ArmId, u64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n < quota)
        .map(|(i, &n)| (ArmId(i), quota - n))
        .collect();
    starving.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    starving
}

/// The allocator's entire memory: per-arm statistics, the elapsed round
/// count, and the policy configuration.
///
/// Feasibility (`arm_count * min_rate <= 1`) is checked at construction, so a
/// live state can always produce a decision.
#[derive(Clone, Debug)]
pub struct PolicyState {
    kind: PolicyKind,
    params: FairnessParams,
    stats: Vec<ArmStats>,
    rounds_elapsed: u64,
}

impl PolicyState {
    pub fn new(kind: PolicyKind, arm_count: usize, params: FairnessParams) -> Result<Self> {
        if arm_count == 0 {
            return Err(Error::Config("arm_count must be at least 1".into()));
        }
        if !(params.exploration_coeff.is_finite() && params.exploration_coeff > 0.0) {
            return Err(Error::Config(format!(
                "exploration_coeff must be a positive real, got {}",
                params.exploration_coeff
            )));
        }
        if !params.min_rate.feasible_for(arm_count) {
            return Err(Error::Infeasible {
                arm_count,
                min_rate: params.min_rate,
            });
        }
        match &kind {
            PolicyKind::EpsilonGreedy { epsilon } => {
                if !(0.0..=1.0).contains(epsilon) {
                    return Err(Error::Config(format!(
                        "epsilon must be in [0, 1], got {epsilon}"
                    )));
                }
            }
            PolicyKind::Oracle { true_means } => {
                if true_means.len() != arm_count {
                    return Err(Error::Config(format!(
                        "oracle needs one true mean per arm: got {} for {} arms",
                        true_means.len(),
                        arm_count
                    )));
                }
                if true_means.iter().any(|m| !(0.0..=1.0).contains(m)) {
                    return Err(Error::Config("oracle true means must be in [0, 1]".into()));
                }
            }
            _ => {}
        }
        Ok(PolicyState {
            kind,
            params,
            stats: vec![ArmStats::default(); arm_count],
            rounds_elapsed: 0,
        })
    }

    pub fn kind(&self) -> &PolicyKind {
        &self.kind
    }

    pub fn params(&self) -> FairnessParams {
        self.params
    }

    pub fn arm_count(&self) -> usize {
        self.stats.len()
    }

    pub fn rounds_elapsed(&self) -> u64 {
        self.rounds_elapsed
    }

    pub fn stats(&self) -> &[ArmStats] {
        &self.stats
    }

    pub fn pull_counts(&self) -> Vec<u64> {
        self.stats.iter().map(ArmStats::pulls).collect()
    }

    /// Starving set for the round about to be played.
    pub fn starving(&self) -> Vec<(ArmId, u64)> {
        starving_set(
            &self.pull_counts(),
            self.rounds_elapsed + 1,
            self.params.min_rate,
        )
    }

    /// Picks the arm for the round about to be played. Does not mutate any
    /// statistics; [`PolicyState::update`] does.
    pub fn select_arm<R: Rng>(&self, rng: &mut R) -> Decision {
        match &self.kind {
            PolicyKind::StrictRateUcb => self.select_constrained(),
            PolicyKind::Ucb1 => self.select_unconstrained(),
            _ => self.baseline_select(rng),
        }
    }

    /// Records the observed reward for the arm just played.
    pub fn update(&mut self, arm: ArmId, reward: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::RewardOutOfRange(reward));
        }
        let arm_count = self.stats.len();
        let stats = self
            .stats
            .get_mut(arm.index())
            .ok_or(Error::ArmOutOfRange {
                arm: arm.index(),
                arm_count,
            })?;
        stats.record(reward);
        self.rounds_elapsed += 1;
        Ok(())
    }

    fn select_constrained(&self) -> Decision {
        if let Some(arm) = self.unpulled_arm() {
            return Decision {
                arm,
                reason: DecisionReason::Initialization,
            };
        }
        let starving = self.starving();
        if let Some(&(arm, _)) = starving.first() {
            return Decision {
                arm,
                reason: DecisionReason::FairnessOverride,
            };
        }
        Decision {
            arm: self.ucb_argmax(),
            reason: DecisionReason::UcbExploit,
        }
    }

    fn select_unconstrained(&self) -> Decision {
        if let Some(arm) = self.unpulled_arm() {
            return Decision {
                arm,
                reason: DecisionReason::Initialization,
            };
        }
        Decision {
            arm: self.ucb_argmax(),
            reason: DecisionReason::UcbExploit,
        }
    }

    fn baseline_select<R: Rng>(&self, rng: &mut R) -> Decision {
        let k = self.stats.len();
        let arm = match &self.kind {
            PolicyKind::RoundRobin => ArmId((self.rounds_elapsed % k as u64) as usize),
            PolicyKind::UniformRandom => ArmId(rng.random_range(0..k)),
            PolicyKind::EpsilonGreedy { epsilon } => {
                if rng.random::<f64>() < *epsilon {
                    ArmId(rng.random_range(0..k))
                } else {
                    self.mean_argmax()
                }
            }
            PolicyKind::Oracle { true_means } => argmax(true_means),
            PolicyKind::StrictRateUcb | PolicyKind::Ucb1 => {
                unreachable!("UCB kinds never reach baseline selection")
            }
        };
        Decision {
            arm,
            reason: DecisionReason::Baseline,
        }
    }

    fn unpulled_arm(&self) -> Option<ArmId> {
        self.stats
            .iter()
            .position(|s| s.pulls() == 0)
            .map(ArmId)
    }

    fn ucb_argmax(&self) -> ArmId {
        let round = self.rounds_elapsed + 1;
        let indices: Vec<f64> = self
            .stats
            .iter()
            .map(|s| ucb_index(s, round, self.params.exploration_coeff))
            .collect();
        argmax(&indices)
    }

    fn mean_argmax(&self) -> ArmId {
        let means: Vec<f64> = self
            .stats
            .iter()
            .map(|s| s.mean().unwrap_or(0.0))
            .collect();
        argmax(&means)
    }
}

/// First index attaining the maximum (lowest index wins ties).
fn argmax(values: &[f64]) -> ArmId {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    ArmId(best)
}
