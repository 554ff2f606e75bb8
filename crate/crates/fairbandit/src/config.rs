//! Declarative experiment configuration.
//!
//! Experiments are described by a TOML file:
//!
//! ```toml
//! horizon = 1000
//! replications = 200
//! base_seed = 42
//! out_dir = "results"
//! sweep = ["0", "1/4", "1/2"]   # optional fairness-level sweep
//! trace = false                 # optional per-round trace output
//!
//! [policy]
//! kind = "strict_rate_ucb"      # ucb1 | round_robin | epsilon_greedy | uniform | oracle
//! min_rate = "1/2"              # rational "p/q"; default "0"
//! exploration_coeff = 2.0       # strict_rate_ucb and ucb1 only
//! # epsilon = 0.1               # epsilon_greedy only
//!
//! [env]
//! kind = "co_tetris"            # or "space_invaders"
//! teammates = [
//!   { p0 = 0.9, p_max = 0.9, lambda = 0.0 },
//!   { p0 = 0.3, p_max = 0.3, lambda = 0.0 },
//! ]
//! # space_invaders instead takes base_rate, support_boost, epoch_length
//! ```
//!
//! Values can be overridden after parsing with dotted keys
//! (`policy.min_rate=1/3`, `horizon=5000`); overrides pass through the same
//! type checks as file values.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::env::{EnvModel, TeammateModel};
use crate::error::{Error, Result};
use crate::rate::Rate;

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_OUT_DIR: &str = "results";

/// Policy selection rule named in a config file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyName {
    StrictRateUcb,
    Ucb1,
    RoundRobin,
    EpsilonGreedy,
    Uniform,
    Oracle,
}

impl PolicyName {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyName::StrictRateUcb => "strict_rate_ucb",
            PolicyName::Ucb1 => "ucb1",
            PolicyName::RoundRobin => "round_robin",
            PolicyName::EpsilonGreedy => "epsilon_greedy",
            PolicyName::Uniform => "uniform",
            PolicyName::Oracle => "oracle",
        }
    }
}

impl FromStr for PolicyName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict_rate_ucb" => Ok(PolicyName::StrictRateUcb),
            "ucb1" => Ok(PolicyName::Ucb1),
            "round_robin" => Ok(PolicyName::RoundRobin),
            "epsilon_greedy" => Ok(PolicyName::EpsilonGreedy),
            "uniform" => Ok(PolicyName::Uniform),
            "oracle" => Ok(PolicyName::Oracle),
            other => Err(Error::Config(format!(
                "policy.kind: unknown policy `{other}` (expected strict_rate_ucb, ucb1, \
                 round_robin, epsilon_greedy, uniform, or oracle)"
            ))),
        }
    }
}

/// Validated policy settings.
#[derive(Clone, Debug)]
pub struct PolicyConfig {
    pub kind: PolicyName,
    /// Minimum selection rate. Enforced by `strict_rate_ucb`; for every other
    /// kind it is only the audit target for the violation metric.
    pub min_rate: Rate,
    pub exploration_coeff: f64,
    pub epsilon: f64,
}

/// Validated description of one experiment: policy, environment, horizon,
/// replication count, seeding, optional sweep grid, and output location.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub horizon: u64,
    pub replications: u32,
    pub base_seed: u64,
    pub out_dir: PathBuf,
    pub sweep: Option<Vec<Rate>>,
    pub trace: bool,
    pub policy: PolicyConfig,
    pub env: EnvModel,
    /// The merged (file + overrides) document, echoed into the run manifest.
    pub echo: toml::Table,
}

impl ExperimentConfig {
    pub fn arm_count(&self) -> usize {
        self.env.arm_count()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    horizon: u64,
    replications: u32,
    base_seed: u64,
    out_dir: Option<PathBuf>,
    sweep: Option<Vec<RateText>>,
    trace: Option<bool>,
    policy: RawPolicy,
    env: RawEnv,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    kind: String,
    min_rate: Option<RateText>,
    exploration_coeff: Option<f64>,
    epsilon: Option<f64>,
}

/// A rate as written in config: `"p/q"`, or a bare integer (`0`, `1`).
#[derive(Debug)]
struct RateText(String);

impl RateText {
    fn parse(&self, key: &str) -> Result<Rate> {
        self.0
            .parse()
            .map_err(|e| Error::Config(format!("{key}: {e}")))
    }
}

impl<'de> Deserialize<'de> for RateText {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RateVisitor;
        impl serde::de::Visitor<'_> for RateVisitor {
            type Value = RateText;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a rational rate like \"1/2\" or an integer")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<RateText, E> {
                Ok(RateText(v.to_string()))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<RateText, E> {
                Ok(RateText(v.to_string()))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<RateText, E> {
                Ok(RateText(v.to_string()))
            }
        }
        deserializer.deserialize_any(RateVisitor)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnv {
    kind: String,
    teammates: Option<Vec<RawTeammate>>,
    base_rate: Option<f64>,
    support_boost: Option<f64>,
    epoch_length: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTeammate {
    p0: f64,
    p_max: f64,
    lambda: Option<f64>,
}

/// Reads, overrides, and validates a config file.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, overrides)
        .map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
}

/// Parses config text, applies dotted-key overrides, and validates.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    for entry in overrides {
        apply_override(&mut table, entry)?;
    }
    let raw: RawConfig = table
        .clone()
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    validate(raw, table)
}

/// Applies one `key=value` override with a dotted path, e.g.
/// `policy.min_rate=1/3`. The value is parsed as a TOML literal where
/// possible and falls back to a string, so it is type-checked exactly like a
/// file value during deserialization.
fn apply_override(root: &mut toml::Table, entry: &str) -> Result<()> {
    let (path, value) = entry.split_once('=').ok_or_else(|| {
        Error::Config(format!("override `{entry}` must have the form key=value"))
    })?;
    let path = path.trim();
    if path.is_empty() {
        return Err(Error::Config(format!("override `{entry}` has an empty key")));
    }
    let parsed = parse_override_value(value);
    let mut segments = path.split('.').peekable();
    let mut table = root;
    while let Some(segment) = segments.next() {
        if segments.peek().is_none() {
            table.insert(segment.to_string(), parsed);
            break;
        }
        let slot = table
            .entry(segment.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = slot.as_table_mut().ok_or_else(|| {
            Error::Config(format!("override `{path}`: `{segment}` is not a table"))
        })?;
    }
    Ok(())
}

fn parse_override_value(value: &str) -> toml::Value {
    let wrapped = format!("v = {value}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key v was just parsed"),
        Err(_) => toml::Value::String(value.to_string()),
    }
}

fn validate(raw: RawConfig, echo: toml::Table) -> Result<ExperimentConfig> {
    if raw.horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    if raw.replications == 0 {
        return Err(Error::Config("replications must be at least 1".into()));
    }

    let policy = validate_policy(raw.policy)?;
    let env = validate_env(raw.env)?;
    env.validate()?;

    let arm_count = env.arm_count();
    if !policy.min_rate.feasible_for(arm_count) {
        return Err(Error::Infeasible {
            arm_count,
            min_rate: policy.min_rate,
        });
    }
    let sweep = match raw.sweep {
        None => None,
        Some(values) => {
            if values.is_empty() {
                return Err(Error::Config("sweep must list at least one rate".into()));
            }
            let mut rates = Vec::with_capacity(values.len());
            for v in &values {
                let rate = v.parse("sweep entry")?;
                if !rate.feasible_for(arm_count) {
                    return Err(Error::Infeasible {
                        arm_count,
                        min_rate: rate,
                    });
                }
                rates.push(rate);
            }
            Some(rates)
        }
    };

    Ok(ExperimentConfig {
        horizon: raw.horizon,
        replications: raw.replications,
        base_seed: raw.base_seed,
        out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        sweep,
        trace: raw.trace.unwrap_or(false),
        policy,
        env,
        echo,
    })
}

fn validate_policy(raw: RawPolicy) -> Result<PolicyConfig> {
    let kind: PolicyName = raw.kind.parse()?;
    let min_rate = match raw.min_rate {
        None => Rate::ZERO,
        Some(s) => s.parse("policy.min_rate")?,
    };
    let exploration_coeff = match raw.exploration_coeff {
        None => crate::bandit::FairnessParams::DEFAULT_EXPLORATION_COEFF,
        Some(c) => {
            if !matches!(kind, PolicyName::StrictRateUcb | PolicyName::Ucb1) {
                return Err(Error::Config(format!(
                    "policy.exploration_coeff only applies to strict_rate_ucb and ucb1, \
                     not {}",
                    kind.as_str()
                )));
            }
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Config(format!(
                    "policy.exploration_coeff must be a positive real, got {c}"
                )));
            }
            c
        }
    };
    let epsilon = match raw.epsilon {
        None => DEFAULT_EPSILON,
        Some(e) => {
            if kind != PolicyName::EpsilonGreedy {
                return Err(Error::Config(format!(
                    "policy.epsilon only applies to epsilon_greedy, not {}",
                    kind.as_str()
                )));
            }
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Config(format!(
                    "policy.epsilon must be in [0, 1], got {e}"
                )));
            }
            e
        }
    };
    Ok(PolicyConfig {
        kind,
        min_rate,
        exploration_coeff,
        epsilon,
    })
}

fn validate_env(raw: RawEnv) -> Result<EnvModel> {
    match raw.kind.as_str() {
        "co_tetris" => {
            for (key, present) in [
                ("base_rate", raw.base_rate.is_some()),
                ("support_boost", raw.support_boost.is_some()),
                ("epoch_length", raw.epoch_length.is_some()),
            ] {
                if present {
                    return Err(Error::Config(format!(
                        "env.{key} only applies to space_invaders"
                    )));
                }
            }
            let teammates = raw
                .teammates
                .ok_or_else(|| Error::Config("env.teammates is required for co_tetris".into()))?
                .into_iter()
                .map(|t| TeammateModel {
                    base_skill: t.p0,
                    max_skill: t.p_max,
                    learning_rate: t.lambda.unwrap_or(0.0),
                })
                .collect();
            Ok(EnvModel::CoTetris { teammates })
        }
        "space_invaders" => {
            if raw.teammates.is_some() {
                return Err(Error::Config(
                    "env.teammates only applies to co_tetris".into(),
                ));
            }
            let require = |key: &str, v: Option<f64>| {
                v.ok_or_else(|| {
                    Error::Config(format!("env.{key} is required for space_invaders"))
                })
            };
            Ok(EnvModel::SpaceInvaders {
                base_rate: require("base_rate", raw.base_rate)?,
                support_boost: require("support_boost", raw.support_boost)?,
                epoch_length: raw.epoch_length.ok_or_else(|| {
                    Error::Config("env.epoch_length is required for space_invaders".into())
                })?,
            })
        }
        other => Err(Error::Config(format!(
            "env.kind: unknown environment `{other}` (expected co_tetris or space_invaders)"
        ))),
    }
}
