//! Simulated teammate environments behind a uniform reset/step interface.
//!
//! Two desk-scale tasks are modeled:
//!
//! - **Co-Tetris block allocation**: each round one falling block is handed
//!   to one teammate, who places it with a success probability given by a
//!   skill curve that can improve with practice.
//! - **Space-Invaders support allocation**: each round is one decision epoch
//!   in which a supporter backs one of two sides; both sides eliminate
//!   enemies tick by tick, the supported side at a boosted rate.
//!
//! Episodes are deterministic functions of `(config, seed, action sequence)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bandit::ArmId;
use crate::error::{Error, Result};

/// A simulated human teammate: success probability that rises from
/// `base_skill` toward `max_skill` with practice.
///
/// After `n` allocations the effective skill is
/// `max_skill - (max_skill - base_skill) * exp(-learning_rate * n)`,
/// a saturating curve bounded by `[base_skill, max_skill]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TeammateModel {
    pub base_skill: f64,
    pub max_skill: f64,
    pub learning_rate: f64,
}

impl TeammateModel {
    /// A teammate whose skill never changes.
    pub fn constant(skill: f64) -> Self {
        TeammateModel {
            base_skill: skill,
            max_skill: skill,
            learning_rate: 0.0,
        }
    }

    /// Success probability after the given number of prior allocations.
    pub fn effective_skill(&self, allocations: u64) -> f64 {
        let gap = self.max_skill - self.base_skill;
        let progress = 1.0 - (-self.learning_rate * allocations as f64).exp();
        // Evaluated from the base endpoint and clamped so the result is
        // exactly base_skill at n = 0 and never leaves [base, max] to
        // floating-point rounding.
        (self.base_skill + gap * progress).clamp(self.base_skill, self.max_skill)
    }

    /// True when the skill is the same at every allocation count.
    pub fn is_constant(&self) -> bool {
        self.learning_rate == 0.0 || self.max_skill == self.base_skill
    }

    fn validate(&self, key: &str) -> Result<()> {
        if !(0.0..=1.0).contains(&self.base_skill) {
            return Err(Error::Config(format!(
                "{key}.p0 must be in [0, 1], got {}",
                self.base_skill
            )));
        }
        if !(0.0..=1.0).contains(&self.max_skill) {
            return Err(Error::Config(format!(
                "{key}.p_max must be in [0, 1], got {}",
                self.max_skill
            )));
        }
        if self.max_skill < self.base_skill {
            return Err(Error::Config(format!(
                "{key}.p_max ({}) must be at least p0 ({})",
                self.max_skill, self.base_skill
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::Config(format!(
                "{key}.lambda must be a non-negative real, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Static description of a task, independent of episode state.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvModel {
    CoTetris {
        teammates: Vec<TeammateModel>,
    },
    SpaceInvaders {
        /// Per-tick elimination probability on an unsupported side.
        base_rate: f64,
        /// Additional per-tick probability on the supported side.
        support_boost: f64,
        /// Ticks per decision epoch.
        epoch_length: u32,
    },
}

impl EnvModel {
    pub fn name(&self) -> &'static str {
        match self {
            EnvModel::CoTetris { .. } => "co_tetris",
            EnvModel::SpaceInvaders { .. } => "space_invaders",
        }
    }

    pub fn arm_count(&self) -> usize {
        match self {
            EnvModel::CoTetris { teammates } => teammates.len(),
            EnvModel::SpaceInvaders { .. } => 2,
        }
    }

    /// True when every arm's expected reward is fixed for the whole episode.
    pub fn is_stationary(&self) -> bool {
        match self {
            EnvModel::CoTetris { teammates } => teammates.iter().all(TeammateModel::is_constant),
            EnvModel::SpaceInvaders { .. } => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnvModel::CoTetris { teammates } => {
                if teammates.len() < 2 {
                    return Err(Error::Config(format!(
                        "env.teammates needs at least 2 entries, got {}",
                        teammates.len()
                    )));
                }
                for (i, t) in teammates.iter().enumerate() {
                    t.validate(&format!("env.teammates[{i}]"))?;
                }
            }
            EnvModel::SpaceInvaders {
                base_rate,
                support_boost,
                epoch_length,
            } => {
                if !(0.0..=1.0).contains(base_rate) {
                    return Err(Error::Config(format!(
                        "env.base_rate must be in [0, 1], got {base_rate}"
                    )));
                }
                if !(0.0..=1.0).contains(support_boost) {
                    return Err(Error::Config(format!(
                        "env.support_boost must be in [0, 1], got {support_boost}"
                    )));
                }
                if base_rate + support_boost > 1.0 {
                    return Err(Error::Config(format!(
                        "env.base_rate + env.support_boost must not exceed 1, got {}",
                        base_rate + support_boost
                    )));
                }
                if *epoch_length == 0 {
                    return Err(Error::Config("env.epoch_length must be at least 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Everything needed to start an episode.
#[derive(Clone, Debug)]
pub struct EnvConfig {
    pub model: EnvModel,
    pub horizon: u64,
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        self.model.validate()
    }
}

/// Result of one environment step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// Team-performance reward in `[0, 1]`, the signal the allocator learns from.
    pub reward: f64,
    /// Individual score gained by each player this step, for fairness traces.
    pub per_player_gain: Vec<f64>,
}

/// A running episode: allocation counters, the round clock, and the seeded
/// random stream. Episodes are independent, so replications can run on
/// separate threads, each owning its own state.
#[derive(Clone, Debug)]
pub struct Environment {
    model: EnvModel,
    allocations: Vec<u64>,
    round: u64,
    horizon: u64,
    rng: ChaCha8Rng,
}

impl Environment {
    /// Starts a fresh episode. Identical `(config, seed)` pairs replay
    /// identically under identical action sequences.
    pub fn reset(config: &EnvConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Environment {
            model: config.model.clone(),
            allocations: vec![0; config.model.arm_count()],
            round: 0,
            horizon: config.horizon,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn arm_count(&self) -> usize {
        self.allocations.len()
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn allocations(&self) -> &[u64] {
        &self.allocations
    }

    pub fn is_stationary(&self) -> bool {
        self.model.is_stationary()
    }

    /// Expected reward of allocating to each arm right now: current effective
    /// skill per teammate for Co-Tetris, expected normalized epoch reward per
    /// supported side for Space Invaders. Constant over the episode for
    /// stationary models.
    pub fn true_means(&self) -> Vec<f64> {
        match &self.model {
            EnvModel::CoTetris { teammates } => teammates
                .iter()
                .zip(&self.allocations)
                .map(|(t, &n)| t.effective_skill(n))
                .collect(),
            EnvModel::SpaceInvaders {
                base_rate,
                support_boost,
                ..
            } => {
                // Supporting either side yields (2 * base + boost) / 2 of the
                // per-epoch maximum in expectation.
                let mean = (2.0 * base_rate + support_boost) / 2.0;
                vec![mean; 2]
            }
        }
    }

    /// Plays one round: allocates the resource to `arm` and draws the outcome.
    pub fn step(&mut self, arm: ArmId) -> Result<StepOutcome> {
        if self.round >= self.horizon {
            return Err(Error::EpisodeFinished {
                horizon: self.horizon,
            });
        }
        let Environment {
            model,
            allocations,
            rng,
            ..
        } = self;
        let chosen = arm.index();
        if chosen >= allocations.len() {
            return Err(Error::ArmOutOfRange {
                arm: chosen,
                arm_count: allocations.len(),
            });
        }
        let outcome = match model {
            EnvModel::CoTetris { teammates } => {
                let skill = teammates[chosen].effective_skill(allocations[chosen]);
                let success = rng.random::<f64>() < skill;
                let mut gain = vec![0.0; allocations.len()];
                let reward = if success {
                    gain[chosen] = 1.0;
                    1.0
                } else {
                    0.0
                };
                StepOutcome {
                    reward,
                    per_player_gain: gain,
                }
            }
            EnvModel::SpaceInvaders {
                base_rate,
                support_boost,
                epoch_length,
            } => {
                // Fixed draw order (all side-0 ticks, then side 1) keeps
                // episodes reproducible.
                let mut kills = [0u64; 2];
                for (side, count) in kills.iter_mut().enumerate() {
                    let p = *base_rate + if side == chosen { *support_boost } else { 0.0 };
                    for _ in 0..*epoch_length {
                        if rng.random::<f64>() < p {
                            *count += 1;
                        }
                    }
                }
                StepOutcome {
                    reward: (kills[0] + kills[1]) as f64 / (2 * *epoch_length) as f64,
                    per_player_gain: vec![kills[0] as f64, kills[1] as f64],
                }
            }
        };
        self.allocations[chosen] += 1;
        self.round += 1;
        Ok(outcome)
    }
}
