//! Property tests for the policy, environment, and metric invariants.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairbandit::bandit::{
    required_pulls, starving_set, ucb_index, ArmStats, DecisionReason, FairnessParams,
    PolicyKind, PolicyState,
};
use fairbandit::env::{EnvConfig, EnvModel, Environment, TeammateModel};
use fairbandit::bandit::ArmId;
use fairbandit::metrics::{gini, jain_index, windowed_share, EpisodeTrace, TraceRecord};
use fairbandit::Rate;

/// Deterministic reward table: one reward per (round, arm) pair.
fn reward_table(seed: u64, horizon: usize, arms: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..horizon)
        .map(|_| (0..arms).map(|_| rand::Rng::random::<f64>(&mut rng)).collect())
        .collect()
}

/// A feasible (arm_count, min_rate) pair; the numerator is capped at
/// `den / k`, so the boundary `v = 1/k` is reachable.
fn feasible_rate() -> impl Strategy<Value = (usize, Rate)> {
    (1usize..=8, 1u64..=40, 0u64..=40).prop_map(|(k, den, num)| {
        let num = num % (den / k as u64 + 1);
        (k, Rate::new(num, den).unwrap())
    })
}

fn scripted_trace(arms: &[usize], arm_count: usize, min_rate: Rate) -> EpisodeTrace {
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

proptest! {
    /// Strict-rate UCB never lets any arm fall more than one pull behind its
    /// quota, no matter what rewards arrive, and the set of arms below quota
    /// never covers all arms. At the horizon every arm holds at least
    /// `v - 2/T` of the rounds (checked in exact integer arithmetic).
    #[test]
    fn rate_guarantee_holds_for_any_reward_stream(
        (arm_count, min_rate) in feasible_rate(),
        horizon in 100u64..600,
        reward_seed in any::<u64>(),
    ) {
        let rewards = reward_table(reward_seed, horizon as usize, arm_count);
        let mut policy = PolicyState::new(
            PolicyKind::StrictRateUcb,
            arm_count,
            FairnessParams::new(min_rate, 2.0),
        ).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut counts = vec![0u64; arm_count];
        for round in 1..=horizon {
            let decision = policy.select_arm(&mut rng);
            policy.update(decision.arm, rewards[round as usize - 1][decision.arm.index()]).unwrap();
            counts[decision.arm.index()] += 1;
            let quota = required_pulls(round, min_rate);
            let mut below = 0usize;
            for &n in &counts {
                prop_assert!(n + 1 >= quota, "round {round}: count {n} under quota {quota} by more than 1");
                if n < quota {
                    below += 1;
                }
            }
            prop_assert!(below < arm_count, "every arm fell below quota");
        }
        // Final share: n_i(T) / T >= v - 2/T  <=>  den*n_i >= num*T - 2*den.
        for &n in &counts {
            let lhs = min_rate.denom() as i128 * n as i128;
            let rhs = min_rate.numer() as i128 * horizon as i128 - 2 * min_rate.denom() as i128;
            prop_assert!(lhs >= rhs, "final count {n} below guaranteed share");
        }
    }

    /// With v = 0 the constrained policy's selection sequence is identical to
    /// UCB1's on the same reward stream, and the override reason never fires.
    #[test]
    fn zero_rate_reduces_to_ucb1(
        arm_count in 1usize..=6,
        horizon in 1u64..400,
        reward_seed in any::<u64>(),
    ) {
        let rewards = reward_table(reward_seed, horizon as usize, arm_count);
        let params = FairnessParams::new(Rate::ZERO, 2.0);
        let mut constrained =
            PolicyState::new(PolicyKind::StrictRateUcb, arm_count, params).unwrap();
        let mut plain = PolicyState::new(PolicyKind::Ucb1, arm_count, params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (round, row) in rewards.iter().enumerate() {
            let a = constrained.select_arm(&mut rng);
            let b = plain.select_arm(&mut rng);
            prop_assert_eq!(a.arm, b.arm, "diverged at round {}", round + 1);
            prop_assert_ne!(a.reason, DecisionReason::FairnessOverride);
            let reward = row[a.arm.index()];
            constrained.update(a.arm, reward).unwrap();
            plain.update(b.arm, reward).unwrap();
        }
    }

    /// Quotas never decrease in the round or the rate, and a zero rate owes
    /// nothing.
    #[test]
    fn quota_is_monotone(
        round in 1u64..100_000,
        num_a in 0u64..=30, den_a in 1u64..=30,
        num_b in 0u64..=30, den_b in 1u64..=30,
    ) {
        let a = Rate::new(num_a.min(den_a), den_a).unwrap();
        let b = Rate::new(num_b.min(den_b), den_b).unwrap();
        prop_assert!(required_pulls(round + 1, a) >= required_pulls(round, a));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(required_pulls(round, lo) <= required_pulls(round, hi));
        prop_assert_eq!(required_pulls(round, Rate::ZERO), 0);
    }

    /// The UCB index strictly decreases as the pull count grows (mean and
    /// round fixed) and is infinite exactly for unpulled arms.
    #[test]
    fn ucb_index_sanity(
        pulls in 1u64..10_000,
        mean_millis in 0u64..=1000,
        round in 2u64..100_000,
    ) {
        let mean = mean_millis as f64 / 1000.0;
        let build = |n: u64| {
            let mut state = PolicyState::new(PolicyKind::Ucb1, 1, FairnessParams::default()).unwrap();
            for _ in 0..n {
                state.update(ArmId(0), mean).unwrap();
            }
            state.stats()[0]
        };
        let fewer = build(pulls);
        let more = build(pulls + 1);
        prop_assert!(ucb_index(&more, round, 2.0) < ucb_index(&fewer, round, 2.0));
        prop_assert!(ucb_index(&ArmStats::default(), round, 2.0).is_infinite());
        prop_assert!(ucb_index(&fewer, round, 2.0).is_finite());
    }

    /// Every policy kind always returns an in-range arm, and pull counts
    /// always sum to the elapsed rounds.
    #[test]
    fn decisions_are_total_and_state_conserves(
        arm_count in 1usize..=6,
        horizon in 1u64..200,
        kind_pick in 0usize..6,
        seed in any::<u64>(),
    ) {
        let kind = match kind_pick {
            0 => PolicyKind::StrictRateUcb,
            1 => PolicyKind::Ucb1,
            2 => PolicyKind::RoundRobin,
            3 => PolicyKind::EpsilonGreedy { epsilon: 0.3 },
            4 => PolicyKind::UniformRandom,
            _ => PolicyKind::Oracle {
                true_means: (0..arm_count).map(|i| i as f64 / arm_count as f64).collect(),
            },
        };
        let mut policy = PolicyState::new(kind, arm_count, FairnessParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rewards = reward_table(seed, horizon as usize, arm_count);
        for row in &rewards {
            let decision = policy.select_arm(&mut rng);
            prop_assert!(decision.arm.index() < arm_count);
            policy.update(decision.arm, row[decision.arm.index()]).unwrap();
            prop_assert_eq!(
                policy.pull_counts().iter().sum::<u64>(),
                policy.rounds_elapsed()
            );
        }
    }

    /// The starving set is consistent with the quota definition: it contains
    /// exactly the under-quota arms with their deficits, most-starved first.
    #[test]
    fn starving_set_matches_definition(
        counts in proptest::collection::vec(0u64..50, 1..8),
        round in 1u64..200,
        den in 1u64..=20,
    ) {
        let num = den.min(1); // v in {0, 1/den}
        let rate = Rate::new(num, den).unwrap();
        let set = starving_set(&counts, round, rate);
        let quota = required_pulls(round, rate);
        for window in set.windows(2) {
            let ordered = window[0].1 > window[1].1
                || (window[0].1 == window[1].1 && window[0].0 < window[1].0);
            prop_assert!(ordered);
        }
        for (i, &n) in counts.iter().enumerate() {
            let listed = set.iter().find(|(arm, _)| arm.index() == i);
            match listed {
                Some(&(_, deficit)) => prop_assert_eq!(deficit, quota - n),
                None => prop_assert!(n >= quota),
            }
        }
    }
}

proptest! {
    /// Identical (config, seed, action sequence) triples replay identically,
    /// rewards stay in [0, 1], per-player gains are non-negative, and
    /// allocations always sum to the round counter.
    #[test]
    fn environments_are_deterministic_and_bounded(
        seed in any::<u64>(),
        actions in proptest::collection::vec(0usize..2, 1..80),
        skills in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=0.5), 2..4),
        si in (0.0f64..=1.0, 0.0f64..=1.0, 1u32..6),
        use_space_invaders in any::<bool>(),
    ) {
        let model = if use_space_invaders {
            let (base, frac, epoch_length) = si;
            EnvModel::SpaceInvaders {
                base_rate: base,
                support_boost: (1.0 - base) * frac,
                epoch_length,
            }
        } else {
            EnvModel::CoTetris {
                teammates: skills
                    .iter()
                    .map(|&(a, b, lambda)| TeammateModel {
                        base_skill: a.min(b),
                        max_skill: a.max(b),
                        learning_rate: lambda,
                    })
                    .collect(),
            }
        };
        let config = EnvConfig { model, horizon: actions.len() as u64 };
        let arm_count = config.model.arm_count();
        let play = || -> Result<Vec<(u64, u64)>, TestCaseError> {
            let mut env = Environment::reset(&config, seed).unwrap();
            let mut outcomes = Vec::new();
            for (i, &a) in actions.iter().enumerate() {
                let arm = ArmId(a % arm_count);
                let out = env.step(arm).unwrap();
                prop_assert!((0.0..=1.0).contains(&out.reward));
                prop_assert!(out.per_player_gain.iter().all(|&g| g >= 0.0));
                prop_assert_eq!(env.allocations().iter().sum::<u64>(), i as u64 + 1);
                outcomes.push((out.reward.to_bits(), out.per_player_gain.iter().map(|g| g.to_bits()).sum()));
            }
            Ok(outcomes)
        };
        prop_assert_eq!(play()?, play()?);
    }

    /// Teammate skill curves never decrease with practice and stay inside
    /// [base, max].
    #[test]
    fn skill_curves_are_monotone(
        a in 0.0f64..=1.0,
        b in 0.0f64..=1.0,
        lambda in 0.0f64..=2.0,
        samples in 1u64..500,
    ) {
        let teammate = TeammateModel {
            base_skill: a.min(b),
            max_skill: a.max(b),
            learning_rate: lambda,
        };
        let mut prev = teammate.effective_skill(0);
        prop_assert_eq!(prev, teammate.base_skill);
        for n in 1..samples {
            let cur = teammate.effective_skill(n);
            prop_assert!(cur >= prev);
            prop_assert!(cur <= teammate.max_skill);
            prev = cur;
        }
    }
}

proptest! {
    /// Jain and Gini are exactly invariant under scaling every count by the
    /// same positive integer, and respect their closed-form bounds.
    #[test]
    fn share_metrics_scale_invariance_and_bounds(
        mut counts in proptest::collection::vec(0u64..100_000, 1..10),
        scale in 1u64..=7,
    ) {
        counts[0] += 1; // at least one positive count
        let k = counts.len() as f64;
        let scaled: Vec<u64> = counts.iter().map(|&c| c * scale).collect();

        let jain = jain_index(&counts).unwrap();
        prop_assert_eq!(jain, jain_index(&scaled).unwrap());
        prop_assert!(jain >= 1.0 / k - 1e-9 && jain <= 1.0 + 1e-9);

        let gini_value = gini(&counts).unwrap();
        prop_assert_eq!(gini_value, gini(&scaled).unwrap());
        prop_assert!(gini_value >= -1e-9 && gini_value <= 1.0 - 1.0 / k + 1e-9);
    }

    /// jain = 1, gini = 0, and all-counts-equal coincide exactly.
    #[test]
    fn equality_characterization(
        counts in proptest::collection::vec(1u64..100_000, 2..8),
    ) {
        let all_equal = counts.iter().all(|&c| c == counts[0]);
        let jain = jain_index(&counts).unwrap();
        let gini_value = gini(&counts).unwrap();
        prop_assert_eq!(jain == 1.0, all_equal);
        prop_assert_eq!(gini_value == 0.0, all_equal);
    }

    /// Every full window's share vector sums to 1.
    #[test]
    fn windowed_shares_sum_to_one(
        arms in proptest::collection::vec(0usize..4, 4..60),
        window in 1usize..10,
    ) {
        let trace = scripted_trace(&arms, 4, Rate::ZERO);
        for shares in windowed_share(&trace, window).unwrap() {
            let sum: f64 = shares.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
