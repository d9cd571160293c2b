//! Offloading strategies behind one [`Policy`] interface.

use serde::{Deserialize, Serialize};

use crate::env::{StateKey, StateVector, Transition};
use crate::error::Result;
use crate::sim::RngStream;
use crate::world::{Action, World};

pub mod actor_critic;
pub mod dqn;
pub mod greedy;
pub mod hungarian;
pub mod optimization;
pub mod qlearning;
pub mod replay;

pub use actor_critic::{ActorCriticAgent, ActorCriticConfig};
pub use dqn::{DqnAgent, DqnConfig};
pub use greedy::Greedy;
pub use optimization::{OptimizationConfig, OptimizationPolicy};
pub use qlearning::{QLearningAgent, QLearningConfig, QTable};
pub use replay::ReplayBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Training,
    Evaluation,
}

/// What a policy sees when asked for a decision.
pub struct DecisionContext<'a> {
    pub world: &'a World,
    pub task: usize,
    pub now: f64,
    pub state: &'a StateVector,
    pub key: &'a StateKey,
}

pub trait Policy {
    fn name(&self) -> &'static str;

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Action;

    /// Consumes a resolved transition. No-op in evaluation mode.
    fn learn(&mut self, _transition: &Transition) -> Result<()> {
        Ok(())
    }

    fn mode(&self) -> Mode {
        Mode::Evaluation
    }

    fn set_mode(&mut self, _mode: Mode) {}

    /// Whether this policy updates from transitions at all.
    fn is_learner(&self) -> bool {
        false
    }

    /// `Some(dt)` for policies that decide in batches every `dt` seconds.
    fn epoch(&self) -> Option<f64> {
        None
    }

    /// Decides a batch of pending tasks at an epoch boundary.
    fn decide_batch(&mut self, world: &World, tasks: &[usize], now: f64) -> Vec<Action> {
        let _ = (world, now);
        vec![Action::Local; tasks.len()]
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Index of the smallest value; the lowest index wins ties.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Uniform random action with probability `epsilon`, else the greedy one.
pub fn epsilon_greedy_select(values: &[f64], epsilon: f64, rng: &mut RngStream) -> usize {
    debug_assert!((0.0..=1.0).contains(&epsilon));
    if epsilon > 0.0 && rng.uniform() < epsilon {
        rng.index(values.len())
    } else {
        argmax(values)
    }
}

/// Linear decay from `start` to `end` over `decay_steps`, then constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.end;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * frac
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            decay_steps: 10_000,
        }
    }
}
