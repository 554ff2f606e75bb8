//! Performance and fairness measures over episode traces.
//!
//! Performance: gap-weighted pseudo-regret against the best stationary arm,
//! and plain cumulative reward. Fairness: final selection shares, Jain's
//! index, the Gini coefficient, a post-hoc audit of the minimum-rate quota,
//! and temporal statistics (windowed shares, disparity onset) that expose
//! *when* an allocation became lopsided, not just whether it did.

use crate::bandit::{required_pulls, ArmId, DecisionReason};
use crate::error::{Error, Result};
use crate::rate::Rate;

/// Default cumulative-share gap treated as a visible disparity.
pub const DEFAULT_DISPARITY_THRESHOLD: f64 = 0.2;
/// Disparity onset ignores round 1 by default: every trace has gap 1 there.
pub const DEFAULT_DISPARITY_START: u64 = 2;

/// One row of an episode trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    /// 1-based round number.
    pub round: u64,
    pub arm: ArmId,
    pub reason: DecisionReason,
    pub reward: f64,
    pub per_player_gain: Vec<f64>,
}

/// Ordered record of one episode: every decision, its reason, and its reward.
/// Input to all metrics.
#[derive(Clone, Debug)]
pub struct EpisodeTrace {
    records: Vec<TraceRecord>,
    arm_count: usize,
    min_rate: Rate,
}

impl EpisodeTrace {
    /// Validates that rounds run 1..=T with no gaps and every arm is in range.
    pub fn new(records: Vec<TraceRecord>, arm_count: usize, min_rate: Rate) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::MalformedTrace("no records".into()));
        }
        for (i, r) in records.iter().enumerate() {
            let expected = i as u64 + 1;
            if r.round != expected {
                return Err(Error::MalformedTrace(format!(
                    "round {} at position {i}, expected {expected}",
                    r.round
                )));
            }
            if r.arm.index() >= arm_count {
                return Err(Error::MalformedTrace(format!(
                    "arm {} out of range for {arm_count} arms at round {}",
                    r.arm, r.round
                )));
            }
        }
        Ok(EpisodeTrace {
            records,
            arm_count,
            min_rate,
        })
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn arm_count(&self) -> usize {
        self.arm_count
    }

    pub fn min_rate(&self) -> Rate {
        self.min_rate
    }

    /// Number of rounds T.
    pub fn horizon(&self) -> u64 {
        self.records.len() as u64
    }

    /// Pull counts per arm after the final round.
    pub fn final_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.arm_count];
        for r in &self.records {
            counts[r.arm.index()] += 1;
        }
        counts
    }

    pub fn total_reward(&self) -> f64 {
        self.records.iter().map(|r| r.reward).sum()
    }
}

/// Fairness summary of one trace.
#[derive(Clone, Debug, PartialEq)]
pub struct FairnessReport {
    /// Final selection share per arm; sums to 1.
    pub shares: Vec<f64>,
    /// Jain's index in `[1/k, 1]`; 1 iff all shares are equal.
    pub jain: f64,
    /// Gini coefficient in `[0, 1 - 1/k]`; 0 iff all shares are equal.
    pub gini: f64,
    /// Quota-audit violations counted by [`violation_count`].
    pub violations: u64,
    /// First round the cumulative share gap crossed the default threshold
    /// (two-arm traces only; `None` otherwise or if it never crossed).
    pub disparity_onset: Option<u64>,
}

impl FairnessReport {
    pub fn from_trace(trace: &EpisodeTrace) -> Result<Self> {
        let counts = trace.final_counts();
        let total = trace.horizon() as f64;
        let shares = counts.iter().map(|&c| c as f64 / total).collect();
        let disparity_onset = if trace.arm_count() == 2 {
            disparity_onset(trace, DEFAULT_DISPARITY_THRESHOLD, DEFAULT_DISPARITY_START)?
        } else {
            None
        };
        Ok(FairnessReport {
            shares,
            jain: jain_index(&counts)?,
            gini: gini(&counts)?,
            violations: violation_count(trace),
            disparity_onset,
        })
    }
}

/// Expected shortfall versus always pulling the best arm:
/// `sum_i (max_mean - mean_i) * counts_i`. Meaningful for stationary arms.
pub fn pseudo_regret(counts: &[u64], true_means: &[f64]) -> Result<f64> {
    if counts.len() != true_means.len() {
        return Err(Error::LengthMismatch {
            counts: counts.len(),
            means: true_means.len(),
        });
    }
    let best = true_means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Evaluated as best * N - sum(mean_i * n_i): algebraically the same, but
    // exact for decimal means (0.9 - 0.6 is not a clean f64, 0.9 * 5 is).
    // Clamped so summation rounding can never report a negative regret.
    let total: u64 = counts.iter().sum();
    let value: f64 = counts
        .iter()
        .zip(true_means)
        .map(|(&n, &mean)| mean * n as f64)
        .sum();
    Ok((best * total as f64 - value).max(0.0))
}

/// Jain's fairness index `(sum x)^2 / (k * sum x^2)`.
pub fn jain_index(counts: &[u64]) -> Result<f64> {
    let (sum, sum_sq) = count_sums(counts)?;
    Ok(sum * sum / (counts.len() as f64 * sum_sq))
}

/// Gini coefficient `sum_ij |x_i - x_j| / (2k * sum x)`.
pub fn gini(counts: &[u64]) -> Result<f64> {
    let (sum, _) = count_sums(counts)?;
    let mut abs_diffs = 0.0;
    for &a in counts {
        for &b in counts {
            abs_diffs += a.abs_diff(b) as f64;
        }
    }
    Ok(abs_diffs / (2.0 * counts.len() as f64 * sum))
}

fn count_sums(counts: &[u64]) -> Result<(f64, f64)> {
    if counts.is_empty() || counts.iter().all(|&c| c == 0) {
        return Err(Error::AllZeroCounts);
    }
    let sum: f64 = counts.iter().map(|&c| c as f64).sum();
    let sum_sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    Ok((sum, sum_sq))
}

/// Post-hoc audit of the minimum-rate constraint: counts `(round, arm)` pairs
/// where the running pull count through round `t` is below `floor(v * t)`.
pub fn violation_count(trace: &EpisodeTrace) -> u64 {
    if trace.min_rate().is_zero() {
        return 0;
    }
    let mut counts = vec![0u64; trace.arm_count()];
    let mut violations = 0;
    for record in trace.records() {
        counts[record.arm.index()] += 1;
        let quota = required_pulls(record.round, trace.min_rate());
        violations += counts.iter().filter(|&&n| n < quota).count() as u64;
    }
    violations
}

/// Selection shares per arm within each full window of the trace. A trailing
/// partial window is dropped. Each returned vector sums to 1.
pub fn windowed_share(trace: &EpisodeTrace, window: usize) -> Result<Vec<Vec<f64>>> {
    if window == 0 {
        return Err(Error::ZeroWindow);
    }
    Ok(trace
        .records()
        .chunks_exact(window)
        .map(|chunk| {
            let mut counts = vec![0u64; trace.arm_count()];
            for r in chunk {
                counts[r.arm.index()] += 1;
            }
            counts
                .iter()
                .map(|&c| c as f64 / window as f64)
                .collect()
        })
        .collect())
}

/// Smallest round `t >= start_round` where the cumulative share gap
/// `|n_0(t) - n_1(t)| / t` exceeds `threshold`, or `None` if it never does.
/// Defined for two-recipient traces.
pub fn disparity_onset(
    trace: &EpisodeTrace,
    threshold: f64,
    start_round: u64,
) -> Result<Option<u64>> {
    if trace.arm_count() != 2 {
        return Err(Error::UnsupportedTraceShape(trace.arm_count()));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Config(format!(
            "disparity threshold must be in (0, 1], got {threshold}"
        )));
    }
    let mut counts = [0u64; 2];
    for record in trace.records() {
        counts[record.arm.index()] += 1;
        if record.round < start_round {
            continue;
        }
        let gap = counts[0].abs_diff(counts[1]) as f64 / record.round as f64;
        if gap > threshold {
            return Ok(Some(record.round));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Builds a trace from a scripted arm sequence; rewards and gains are zero.
    pub(crate) fn scripted(arms: &[usize], arm_count: usize, min_rate: Rate) -> EpisodeTrace {
        let records = arms
            .iter()
            .enumerate()
            .map(|(i, &arm)| TraceRecord {
                round: i as u64 + 1,
                arm: ArmId(arm),
                reason: DecisionReason::Baseline,
                reward: 0.0,
                per_player_gain: vec![0.0; arm_count],
            })
            .collect();
        EpisodeTrace::new(records, arm_count, min_rate).unwrap()
    }

    #[test]
    fn trace_validation_catches_gaps_and_bad_arms() {
        let mut records = scripted(&[0, 1], 2, Rate::ZERO).records().to_vec();
        records[1].round = 3;
        assert!(matches!(
            EpisodeTrace::new(records, 2, Rate::ZERO),
            Err(Error::MalformedTrace(_))
        ));
        assert!(EpisodeTrace::new(vec![], 2, Rate::ZERO).is_err());
        let out_of_range = scripted(&[0], 2, Rate::ZERO).records().to_vec();
        assert!(EpisodeTrace::new(out_of_range, 1, Rate::ZERO).is_ok());
        let bad = scripted(&[1], 2, Rate::ZERO).records().to_vec();
        assert!(EpisodeTrace::new(bad, 1, Rate::ZERO).is_err());
    }

    #[test]
    fn pseudo_regret_zero_when_only_best_pulled() {
        assert_eq!(pseudo_regret(&[10, 0], &[0.9, 0.6]).unwrap(), 0.0);
    }

    #[test]
    fn pseudo_regret_weighs_gaps() {
        // 5 * (0.9 - 0.9) + 5 * (0.9 - 0.6) = 1.5, exactly.
        assert_eq!(pseudo_regret(&[5, 5], &[0.9, 0.6]).unwrap(), 1.5);
    }

    #[test]
    fn pseudo_regret_single_arm_is_zero() {
        assert_eq!(pseudo_regret(&[1000], &[0.4]).unwrap(), 0.0);
    }

    #[test]
    fn pseudo_regret_rejects_length_mismatch() {
        assert!(matches!(
            pseudo_regret(&[1, 2], &[0.5]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn jain_closed_forms() {
        assert_eq!(jain_index(&[10, 10, 10]).unwrap(), 1.0);
        assert_eq!(jain_index(&[1, 0]).unwrap(), 0.5);
        assert_eq!(jain_index(&[3, 1]).unwrap(), 0.8);
    }

    #[test]
    fn gini_closed_forms() {
        assert_eq!(gini(&[7, 7, 7]).unwrap(), 0.0);
        assert_eq!(gini(&[1, 0]).unwrap(), 0.5);
        assert_eq!(gini(&[3, 1]).unwrap(), 0.25);
    }

    #[test]
    fn share_metrics_reject_all_zero() {
        assert!(matches!(jain_index(&[0, 0]), Err(Error::AllZeroCounts)));
        assert!(matches!(gini(&[0, 0]), Err(Error::AllZeroCounts)));
        assert!(matches!(jain_index(&[]), Err(Error::AllZeroCounts)));
    }

    #[test]
    fn violations_zero_when_rate_is_zero() {
        let trace = scripted(&[0, 0, 0, 0, 0], 2, Rate::ZERO);
        assert_eq!(violation_count(&trace), 0);
    }

    #[test]
    fn violations_hand_trace() {
        // k = 2, v = 1/2, arms [0, 0, 0, 1]. Quota floor(t/2) per arm:
        //   t=1: counts [1,0], quota 0 -> ok
        //   t=2: counts [2,0], quota 1 -> arm 1 short (0 < 1)
        //   t=3: counts [3,0], quota 1 -> arm 1 short (0 < 1)
        //   t=4: counts [3,1], quota 2 -> arm 1 short (1 < 2)
        let trace = scripted(&[0, 0, 0, 1], 2, "1/2".parse().unwrap());
        assert_eq!(violation_count(&trace), 3);
    }

    #[test]
    fn violations_match_brute_force_recount() {
        let arms = [0usize, 1, 0, 0, 2, 0, 1, 0, 0, 0, 2, 1];
        let rate: Rate = "1/4".parse().unwrap();
        let trace = scripted(&arms, 3, rate);
        // Independent recount straight from the definition, with the quota
        // evaluated in u128 arithmetic rather than through required_pulls.
        let mut counts = [0u64; 3];
        let mut expected = 0u64;
        for (i, &arm) in arms.iter().enumerate() {
            counts[arm] += 1;
            let t = i as u64 + 1;
            let quota = (rate.numer() as u128 * t as u128 / rate.denom() as u128) as u64;
            expected += counts.iter().filter(|&&n| n < quota).count() as u64;
        }
        assert_eq!(violation_count(&trace), expected);
    }

    #[test]
    fn windowed_share_alternating() {
        let trace = scripted(&[0, 1, 0, 1, 0, 1], 2, Rate::ZERO);
        for shares in windowed_share(&trace, 2).unwrap() {
            assert_eq!(shares, vec![0.5, 0.5]);
        }
    }

    #[test]
    fn windowed_share_concentrated() {
        let trace = scripted(&[0, 0, 0, 0], 2, Rate::ZERO);
        for shares in windowed_share(&trace, 2).unwrap() {
            assert_eq!(shares, vec![1.0, 0.0]);
        }
    }

    #[test]
    fn windowed_share_scripted_blocks() {
        let trace = scripted(&[0, 0, 1, 1], 2, Rate::ZERO);
        assert_eq!(
            windowed_share(&trace, 2).unwrap(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]]
        );
    }

    #[test]
    fn windowed_share_drops_partial_window() {
        let trace = scripted(&[0, 1, 0, 1, 0], 2, Rate::ZERO);
        assert_eq!(windowed_share(&trace, 2).unwrap().len(), 2);
        assert!(windowed_share(&trace, 0).is_err());
        assert!(windowed_share(&trace, 9).unwrap().is_empty());
    }

    #[test]
    fn disparity_onset_from_round_one_sees_the_transient() {
        // Every trace has share gap 1 at t = 1.
        let alternating = scripted(&[0, 1, 0, 1, 0, 1], 2, Rate::ZERO);
        assert_eq!(
            disparity_onset(&alternating, 0.5, 1).unwrap(),
            Some(1),
            "gap |1-0|/1 = 1 > 0.5"
        );
    }

    #[test]
    fn disparity_onset_alternating_never_crosses_from_round_two() {
        let alternating = scripted(&[0, 1, 0, 1, 0, 1, 0, 1], 2, Rate::ZERO);
        assert_eq!(disparity_onset(&alternating, 0.6, 2).unwrap(), None);
    }

    #[test]
    fn disparity_onset_maximal_skew() {
        let skewed = scripted(&[0, 0, 0, 0], 2, Rate::ZERO);
        assert_eq!(disparity_onset(&skewed, 0.9, 1).unwrap(), Some(1));
    }

    #[test]
    fn disparity_onset_requires_two_arms() {
        let trace = scripted(&[0, 1, 2], 3, Rate::ZERO);
        assert!(matches!(
            disparity_onset(&trace, 0.5, 1),
            Err(Error::UnsupportedTraceShape(3))
        ));
        let two = scripted(&[0, 1], 2, Rate::ZERO);
        assert!(disparity_onset(&two, 0.0, 1).is_err());
        assert!(disparity_onset(&two, 1.1, 1).is_err());
    }

    #[test]
    fn fairness_report_combines_metrics() {
        let trace = scripted(&[0, 0, 0, 1], 2, "1/2".parse().unwrap());
        let report = FairnessReport::from_trace(&trace).unwrap();
        assert_eq!(report.shares, vec![0.75, 0.25]);
        assert_eq!(report.jain, jain_index(&[3, 1]).unwrap());
        assert_eq!(report.gini, gini(&[3, 1]).unwrap());
        assert_eq!(report.violations, 3);
        // Gap hits |2-0|/2 = 1 > 0.2 at round 2.
        assert_eq!(report.disparity_onset, Some(2));
    }
}
