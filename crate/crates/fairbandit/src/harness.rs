//! Config-driven Monte-Carlo experiment runner.
//!
//! Every replication draws its environment and policy randomness from
//! separate streams seeded as a pure function of `(base_seed, rep_index,
//! role)`, so results are byte-identical regardless of how many worker
//! threads execute them, and sweep rows share environment seeds so the
//! fairness level is the only varying factor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bandit::{FairnessParams, PolicyKind, PolicyState};
use crate::config::{ExperimentConfig, PolicyName};
use crate::env::{EnvConfig, Environment};
use crate::error::{Error, Result};
use crate::metrics::{pseudo_regret, EpisodeTrace, FairnessReport, TraceRecord};
use crate::output;
use crate::rate::Rate;

/// Which random stream a seed feeds. Policy randomness (epsilon-greedy,
/// uniform) must never perturb environment outcomes, so the two never share
/// a stream.
#[derive(Clone, Copy, Debug)]
pub enum StreamRole {
    Env = 1,
    Policy = 2,
}

/// SplitMix64 finalizer: the fixed 64-bit mixing step behind all stream seeds.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one replication stream:
/// `mix64(mix64(mix64(base_seed) ^ rep_index) ^ role)`.
pub fn stream_seed(base_seed: u64, rep_index: u32, role: StreamRole) -> u64 {
    mix64(mix64(mix64(base_seed) ^ rep_index as u64) ^ role as u64)
}

/// Per-replication metric row, as persisted in `replications.csv`.
#[derive(Clone, Debug)]
pub struct MetricRow {
    pub rep: u32,
    /// `None` when the environment is nonstationary and the best-fixed-arm
    /// comparator is ill-defined.
    pub pseudo_regret: Option<f64>,
    pub total_reward: f64,
    pub shares: Vec<f64>,
    pub jain: f64,
    pub gini: f64,
    pub violations: u64,
    pub disparity_onset: Option<u64>,
}

/// Trace and metrics of one replication.
#[derive(Clone, Debug)]
pub struct ReplicationOutput {
    pub trace: EpisodeTrace,
    pub row: MetricRow,
}

/// Aggregate statistics over the replication rows, in rep order.
#[derive(Clone, Debug)]
pub struct Aggregate {
    pub mean_total_reward: f64,
    pub std_total_reward: f64,
    pub mean_pseudo_regret: Option<f64>,
    pub std_pseudo_regret: Option<f64>,
    pub mean_jain: f64,
    pub mean_gini: f64,
    pub mean_violations: f64,
}

/// One experiment's results: per-replication rows plus their aggregate.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub min_rate: Rate,
    pub policy: PolicyName,
    pub rows: Vec<MetricRow>,
    pub aggregate: Aggregate,
    /// Present only when the config asked for trace output.
    pub traces: Option<Vec<EpisodeTrace>>,
}

fn build_policy(config: &ExperimentConfig, env: &Environment) -> Result<PolicyState> {
    let kind = match config.policy.kind {
        PolicyName::StrictRateUcb => PolicyKind::StrictRateUcb,
        PolicyName::Ucb1 => PolicyKind::Ucb1,
        PolicyName::RoundRobin => PolicyKind::RoundRobin,
        PolicyName::EpsilonGreedy => PolicyKind::EpsilonGreedy {
            epsilon: config.policy.epsilon,
        },
        PolicyName::Uniform => PolicyKind::UniformRandom,
        // The oracle sees the environment's reset-time true means.
        PolicyName::Oracle => PolicyKind::Oracle {
            true_means: env.true_means(),
        },
    };
    PolicyState::new(
        kind,
        env.arm_count(),
        FairnessParams::new(config.policy.min_rate, config.policy.exploration_coeff),
    )
}

/// Plays one full select -> step -> update episode, deterministically seeded
/// from `(config.base_seed, rep_index)`.
pub fn run_replication(config: &ExperimentConfig, rep_index: u32) -> Result<ReplicationOutput> {
    let env_config = EnvConfig {
        model: config.env.clone(),
        horizon: config.horizon,
    };
    let mut env = Environment::reset(
        &env_config,
        stream_seed(config.base_seed, rep_index, StreamRole::Env),
    )?;
    let mut policy_rng = ChaCha8Rng::seed_from_u64(stream_seed(
        config.base_seed,
        rep_index,
        StreamRole::Policy,
    ));
    let stationary_means = env.is_stationary().then(|| env.true_means());
    let mut policy = build_policy(config, &env)?;

    let mut records = Vec::with_capacity(config.horizon as usize);
    for round in 1..=config.horizon {
        let decision = policy.select_arm(&mut policy_rng);
        let outcome = env.step(decision.arm)?;
        policy.update(decision.arm, outcome.reward)?;
        records.push(TraceRecord {
            round,
            arm: decision.arm,
            reason: decision.reason,
            reward: outcome.reward,
            per_player_gain: outcome.per_player_gain,
        });
    }
    let trace = EpisodeTrace::new(records, env.arm_count(), config.policy.min_rate)?;
    let row = metric_row(rep_index, &trace, stationary_means.as_deref())?;
    Ok(ReplicationOutput { trace, row })
}

fn metric_row(
    rep: u32,
    trace: &EpisodeTrace,
    stationary_means: Option<&[f64]>,
) -> Result<MetricRow> {
    let counts = trace.final_counts();
    let regret = stationary_means
        .map(|means| pseudo_regret(&counts, means))
        .transpose()?;
    let report = FairnessReport::from_trace(trace)?;
    Ok(MetricRow {
        rep,
        pseudo_regret: regret,
        total_reward: trace.total_reward(),
        shares: report.shares,
        jain: report.jain,
        gini: report.gini,
        violations: report.violations,
        disparity_onset: report.disparity_onset,
    })
}

/// Runs all replications (in parallel) and aggregates, without touching the
/// filesystem. Rows are always aggregated in rep order, so the result is
/// independent of worker count.
pub fn compute_run(config: &ExperimentConfig) -> Result<RunResult> {
    let outputs: Vec<(MetricRow, Option<EpisodeTrace>)> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            run_replication(config, rep)
                .map(|out| (out.row, config.trace.then_some(out.trace)))
        })
        .collect::<Result<_>>()?;
    let (rows, traces): (Vec<MetricRow>, Vec<Option<EpisodeTrace>>) =
        outputs.into_iter().unzip();
    let aggregate = aggregate(&rows);
    Ok(RunResult {
        min_rate: config.policy.min_rate,
        policy: config.policy.kind,
        aggregate,
        rows,
        traces: config.trace.then(|| traces.into_iter().flatten().collect()),
    })
}

/// Runs one experiment and writes `summary.csv`, `replications.csv`, the
/// manifest, and (when enabled) `trace.csv` to the configured directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunResult> {
    let result = compute_run(config)?;
    output::write_outputs(config, std::slice::from_ref(&result))?;
    Ok(result)
}

/// Runs one experiment per sweep rate, sharing `base_seed` across rows so the
/// minimum rate is the only varying factor, and writes a combined summary.
/// Aborts before running anything if any rate is infeasible.
pub fn sweep(config: &ExperimentConfig) -> Result<Vec<RunResult>> {
    let rates = config
        .sweep
        .clone()
        .ok_or_else(|| Error::Config("sweep requires a `sweep` list in the config".into()))?;
    if rates.is_empty() {
        return Err(Error::Config("sweep must list at least one rate".into()));
    }
    let arm_count = config.arm_count();
    for &rate in &rates {
        if !rate.feasible_for(arm_count) {
            return Err(Error::Infeasible {
                arm_count,
                min_rate: rate,
            });
        }
    }
    let results = rates
        .iter()
        .map(|&rate| {
            let mut row_config = config.clone();
            row_config.policy.min_rate = rate;
            compute_run(&row_config)
        })
        .collect::<Result<Vec<_>>>()?;
    output::write_outputs(config, &results)?;
    Ok(results)
}

fn aggregate(rows: &[MetricRow]) -> Aggregate {
    let totals: Vec<f64> = rows.iter().map(|r| r.total_reward).collect();
    let (mean_total_reward, std_total_reward) = mean_std(&totals);
    let regrets: Option<Vec<f64>> = rows.iter().map(|r| r.pseudo_regret).collect();
    let (mean_pseudo_regret, std_pseudo_regret) = match regrets {
        Some(r) => {
            let (m, s) = mean_std(&r);
            (Some(m), Some(s))
        }
        None => (None, None),
    };
    Aggregate {
        mean_total_reward,
        std_total_reward,
        mean_pseudo_regret,
        std_pseudo_regret,
        mean_jain: mean(rows.iter().map(|r| r.jain)),
        mean_gini: mean(rows.iter().map(|r| r.gini)),
        mean_violations: mean(rows.iter().map(|r| r.violations as f64)),
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len() as f64;
    values.sum::<f64>() / n
}

/// Mean and sample (n-1) standard deviation; a single row has std 0 by
/// convention.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, var.sqrt())
}
