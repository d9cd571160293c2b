//! MDP view of the world: observations, tabular keys, actions and reward.
//!
//! Observation layout for `n` zones (dimension `4n + 3`):
//!
//! | block                 | len | meaning                                          |
//! |-----------------------|-----|--------------------------------------------------|
//! | available capacity    | n   | `1 - busy share` over the balance window          |
//! | active vehicles       | n   | vehicles in zone / `max_vehicles_per_zone`        |
//! | queue load            | n   | committed processing seconds / `max_queue_s`      |
//! | network delay         | 1   | recent uplink delay / `max_delay_s`               |
//! | task size             | 1   | position inside the configured size range         |
//! | task deadline         | 1   | position inside the configured deadline range     |
//! | origin zone           | n   | one-hot                                           |
//!
//! Per-node blocks are ordered from the task's origin: slot 0 is the local
//! node, slot 1 the right neighbour, slot `n-1` the left neighbour.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::jain_index;
use crate::world::{Action, TaskOutcome, World};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    /// Weight on the negative normalized delay.
    pub alpha: f64,
    /// Weight on deadline success.
    pub beta: f64,
    /// Weight on the load-balance index.
    pub lambda_balance: f64,
    pub gamma_discount: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            lambda_balance: 1.0,
            gamma_discount: 0.9,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("env.reward.alpha", self.alpha),
            ("env.reward.beta", self.beta),
            ("env.reward.lambda_balance", self.lambda_balance),
        ] {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::config(name, "must be a finite value >= 0"));
            }
        }
        if self.alpha + self.beta + self.lambda_balance == 0.0 {
            return Err(Error::config("env.reward", "weights must not all be zero"));
        }
        if !(self.gamma_discount > 0.0 && self.gamma_discount < 1.0) {
            return Err(Error::config(
                "env.reward.gamma_discount",
                "must lie in (0, 1)",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub reward: RewardWeights,
    /// Cap on `latency / deadline`; rejected tasks take the cap.
    pub delay_cap: f64,
    /// Trailing window for busy shares, seconds.
    pub balance_window_s: f64,
    pub max_queue_s: f64,
    pub max_vehicles_per_zone: f64,
    pub max_delay_s: f64,
    /// Interval between balance samples, seconds.
    pub sample_interval_s: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            reward: RewardWeights::default(),
            delay_cap: 2.0,
            balance_window_s: 5.0,
            max_queue_s: 1.0,
            max_vehicles_per_zone: 50.0,
            max_delay_s: 0.5,
            sample_interval_s: 1.0,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.reward.validate()?;
        for (name, v) in [
            ("env.delay_cap", self.delay_cap),
            ("env.balance_window_s", self.balance_window_s),
            ("env.max_queue_s", self.max_queue_s),
            ("env.max_vehicles_per_zone", self.max_vehicles_per_zone),
            ("env.max_delay_s", self.max_delay_s),
            ("env.sample_interval_s", self.sample_interval_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(name, "must be positive"));
            }
        }
        Ok(())
    }
}

/// Normalized observation; every component lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn dim(zones: usize) -> usize {
        4 * zones + 3
    }

    pub fn zones(&self) -> usize {
        (self.0.len() - 3) / 4
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn capacity(&self) -> &[f64] {
        let n = self.zones();
        &self.0[..n]
    }

    pub fn vehicles(&self) -> &[f64] {
        let n = self.zones();
        &self.0[n..2 * n]
    }

    pub fn queue(&self) -> &[f64] {
        let n = self.zones();
        &self.0[2 * n..3 * n]
    }

    pub fn delay(&self) -> f64 {
        self.0[3 * self.zones()]
    }

    pub fn size(&self) -> f64 {
        self.0[3 * self.zones() + 1]
    }

    pub fn deadline(&self) -> f64 {
        self.0[3 * self.zones() + 2]
    }

    pub fn origin(&self) -> usize {
        let n = self.zones();
        self.0[3 * n + 3..]
            .iter()
            .position(|&x| x > 0.5)
            .unwrap_or(0)
    }
}

fn unit(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

fn position_in(x: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        unit((x - lo) / (hi - lo))
    } else {
        0.0
    }
}

/// Snapshot of the world as seen when deciding `task`.
pub fn observe(world: &World, task: usize, now: f64, cfg: &EnvConfig) -> StateVector {
    let n = world.zone_count();
    let t = &world.tasks[task];
    let origin = t.origin_zone;
    let shares = world.busy_shares(now);
    let mut v = Vec::with_capacity(StateVector::dim(n));
    let ring = |i: usize| (origin + i) % n;
    v.extend((0..n).map(|i| unit(1.0 - shares[world.zones[ring(i)].fog_node])));
    v.extend(
        (0..n).map(|i| unit(world.vehicles_in_zone(ring(i)) as f64 / cfg.max_vehicles_per_zone)),
    );
    v.extend((0..n).map(|i| {
        let node = &world.nodes[world.zones[ring(i)].fog_node];
        unit(node.pending_work(now) / cfg.max_queue_s)
    }));
    v.push(unit(world.delay_estimate() / cfg.max_delay_s));
    v.push(position_in(t.size, world.task_size_range()));
    v.push(position_in(t.deadline, world.deadline_range()));
    v.extend((0..n).map(|z| if z == origin { 1.0 } else { 0.0 }));
    StateVector(v)
}

pub const SIZE_CLASSES: usize = 3;
pub const DEADLINE_CLASSES: usize = 3;
pub const LOAD_LEVELS: usize = 4;
const LOAD_THRESHOLDS: [f64; 3] = [0.25, 0.5, 0.75];

/// Discrete state for the tabular learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateKey {
    pub origin: u16,
    pub size: u8,
    pub deadline: u8,
    /// Queue-load levels of the local, left and right nodes.
    pub loads: [u8; 3],
}

impl StateKey {
    pub fn space_size(zones: usize) -> usize {
        zones * SIZE_CLASSES * DEADLINE_CLASSES * LOAD_LEVELS.pow(3)
    }

    /// Dense index in `0..space_size(zones)`.
    pub fn index(&self) -> usize {
        let mut i = self.origin as usize;
        i = i * SIZE_CLASSES + self.size as usize;
        i = i * DEADLINE_CLASSES + self.deadline as usize;
        for l in self.loads {
            i = i * LOAD_LEVELS + l as usize;
        }
        i
    }

    pub fn components(&self) -> [u32; 6] {
        [
            u32::from(self.origin),
            u32::from(self.size),
            u32::from(self.deadline),
            u32::from(self.loads[0]),
            u32::from(self.loads[1]),
            u32::from(self.loads[2]),
        ]
    }
}

fn third(x: f64) -> u8 {
    ((x * 3.0).floor() as i64).clamp(0, 2) as u8
}

fn load_level(x: f64) -> u8 {
    LOAD_THRESHOLDS.iter().filter(|&&t| x >= t).count() as u8
}

pub fn discretize(state: &StateVector) -> StateKey {
    let n = state.zones();
    let q = state.queue();
    StateKey {
        origin: state.origin() as u16,
        size: third(state.size()),
        deadline: third(state.deadline()),
        loads: [
            load_level(q[0]),
            load_level(q[(n - 1) % n]),
            load_level(q[1 % n]),
        ],
    }
}

/// Inputs to the per-task reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInput {
    pub outcome: TaskOutcome,
    pub latency: Option<f64>,
    pub deadline: f64,
    /// Balance index at resolution time.
    pub balance: f64,
}

impl RewardInput {
    pub fn delay_norm(&self, cap: f64) -> f64 {
        match (self.outcome, self.latency) {
            (TaskOutcome::Rejected, _) | (_, None) => cap,
            (_, Some(l)) => (l / self.deadline).min(cap),
        }
    }

    pub fn success(&self) -> f64 {
        if self.outcome == TaskOutcome::Completed {
            1.0
        } else {
            0.0
        }
    }
}

/// Jain index over node loads.
pub fn balance_index(node_loads: &[f64]) -> f64 {
    jain_index(node_loads)
}

/// `alpha * (-delay) + beta * success + lambda * balance`.
pub fn compute_reward(input: &RewardInput, weights: &RewardWeights, delay_cap: f64) -> f64 {
    weights.alpha * -input.delay_norm(delay_cap)
        + weights.beta * input.success()
        + weights.lambda_balance * input.balance
}

/// One learning sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: StateVector,
    pub key: StateKey,
    pub action: usize,
    pub reward: f64,
    pub next_state: StateVector,
    pub next_key: StateKey,
    pub done: bool,
}

/// Every action is legal in every state.
pub fn legal_actions() -> [Action; Action::COUNT] {
    Action::ALL
}
