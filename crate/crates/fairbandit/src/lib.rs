//! Fairness-constrained sequential resource allocation.
//!
//! A robot (or any allocator) hands out one resource per round across human
//! teammates of unequal skill. Pure reward maximization starves the weaker
//! teammates; this crate implements the strict-rate-constrained UCB policy,
//! which learns per-teammate skill like classical UCB1 while guaranteeing
//! every teammate a configurable minimum share of the selections.
//!
//! The crate bundles:
//!
//! - [`bandit`]: the constrained policy, unconstrained UCB1, and baseline
//!   allocators behind one select/update interface;
//! - [`env`]: desk-scale simulations of two allocation tasks (Co-Tetris-style
//!   block assignment, Space-Invaders-style support allocation);
//! - [`metrics`]: regret, cumulative reward, selection shares, Jain's index,
//!   Gini coefficient, quota-violation audits, and temporal disparity;
//! - [`harness`]: a deterministic, parallel Monte-Carlo experiment runner
//!   with fairness-level sweeps and CSV/manifest outputs;
//! - [`config`]: the TOML experiment schema with dotted-key overrides.
//!
//! # Example
//!
//! ```
//! use fairbandit::bandit::{FairnessParams, PolicyKind, PolicyState};
//! use fairbandit::env::{EnvConfig, EnvModel, Environment, TeammateModel};
//! use rand::SeedableRng;
//!
//! // Two teammates, one clearly stronger; guarantee each 1/4 of the blocks.
//! let env_config = EnvConfig {
//!     model: EnvModel::CoTetris {
//!         teammates: vec![TeammateModel::constant(0.9), TeammateModel::constant(0.3)],
//!     },
//!     horizon: 100,
//! };
//! let mut env = Environment::reset(&env_config, 42)?;
//! let params = FairnessParams::new("1/4".parse()?, 2.0);
//! let mut policy = PolicyState::new(PolicyKind::StrictRateUcb, env.arm_count(), params)?;
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//!
//! for _ in 0..100 {
//!     let decision = policy.select_arm(&mut rng);
//!     let outcome = env.step(decision.arm)?;
//!     policy.update(decision.arm, outcome.reward)?;
//! }
//! // The weaker teammate still received at least a quarter of the rounds
//! // (minus the one-round transient the quota rule allows).
//! assert!(policy.pull_counts()[1] + 1 >= 25);
//! # Ok::<(), fairbandit::Error>(())
//! ```

pub mod bandit;
pub mod config;
pub mod env;
pub mod error;
pub mod harness;
pub mod metrics;
mod output;
pub mod rate;

pub use error::{Error, Result};
pub use rate::Rate;
