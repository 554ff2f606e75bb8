use thiserror::Error;

use crate::rate::Rate;

/// Errors raised by configuration, policies, environments, metrics, and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value failed to parse or validate. The message names
    /// the offending key or value.
    #[error("invalid config: {0}")]
    Config(String),

    /// The fairness constraint cannot be satisfied: with `arm_count` arms an
    /// arm-level minimum rate above `1/arm_count` over-commits the rounds.
    #[error("infeasible fairness constraint: {arm_count} arms * min_rate {min_rate} > 1")]
    Infeasible { arm_count: usize, min_rate: Rate },

    /// Reward outside the `[0, 1]` contract.
    #[error("reward {0} outside [0, 1]")]
    RewardOutOfRange(f64),

    /// Arm index not in `[0, arm_count)`.
    #[error("arm {arm} out of range for {arm_count} arms")]
    ArmOutOfRange { arm: usize, arm_count: usize },

    /// Stepped an episode that already reached its horizon.
    #[error("episode already finished after {horizon} rounds")]
    EpisodeFinished { horizon: u64 },

    /// A share-based metric was asked about an all-zero allocation.
    #[error("metric undefined for all-zero counts")]
    AllZeroCounts,

    /// Pull counts and true means must describe the same arms.
    #[error("length mismatch: {counts} counts vs {means} means")]
    LengthMismatch { counts: usize, means: usize },

    /// Disparity onset is defined for two-recipient traces only.
    #[error("disparity onset requires exactly 2 arms, trace has {0}")]
    UnsupportedTraceShape(usize),

    /// Windowed shares need a positive window.
    #[error("window must be positive")]
    ZeroWindow,

    /// An episode trace violated its structural invariants.
    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
