//! Deep Q-network with experience replay and a periodically synced target.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    argmax, epsilon_greedy_select, DecisionContext, EpsilonSchedule, Mode, Policy, ReplayBuffer,
};
use crate::env::{StateVector, Transition};
use crate::error::{Error, Result};
use crate::nn::{huber_loss, Adam, AdamConfig, Mlp};
use crate::sim::RngStream;
use crate::world::Action;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub optimizer: AdamConfig,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Train steps between target-network syncs.
    pub target_sync_interval: u64,
    /// Transitions stored between train steps.
    pub train_every: u64,
    pub huber_delta: f64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            optimizer: AdamConfig::default(),
            buffer_capacity: 50_000,
            batch_size: 64,
            target_sync_interval: 500,
            train_every: 4,
            huber_delta: 1.0,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        let f = |name: &str| format!("policies.dqn.{name}");
        if self.hidden.contains(&0) {
            return Err(Error::config(f("hidden"), "layer widths must be positive"));
        }
        self.optimizer.validate(&f("optimizer"))?;
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err(Error::config(
                f("buffer_capacity"),
                "must be at least batch_size > 0",
            ));
        }
        if self.target_sync_interval == 0 {
            return Err(Error::config(f("target_sync_interval"), "must be positive"));
        }
        if self.train_every == 0 {
            return Err(Error::config(f("train_every"), "must be positive"));
        }
        if !(self.huber_delta > 0.0) {
            return Err(Error::config(f("huber_delta"), "must be positive"));
        }
        Ok(())
    }

    pub fn layer_sizes(&self, input_dim: usize, actions: usize) -> Vec<usize> {
        let mut sizes = vec![input_dim];
        sizes.extend(&self.hidden);
        sizes.push(actions);
        sizes
    }
}

#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub config: DqnConfig,
    pub online: Mlp,
    pub target: Mlp,
    pub buffer: ReplayBuffer,
    discount: f64,
    adam: Adam,
    schedule: EpsilonSchedule,
    explore: RngStream,
    sampler: RngStream,
    mode: Mode,
    decisions: u64,
    stored: u64,
    train_steps: u64,
}

impl DqnAgent {
    pub fn new(
        config: DqnConfig,
        input_dim: usize,
        discount: f64,
        schedule: EpsilonSchedule,
        seed: u64,
    ) -> Result<Self> {
        Self::with_actions(config, input_dim, Action::COUNT, discount, schedule, seed)
    }

    /// An agent over `actions` discrete actions; only [`Action::COUNT`]
    /// actions can drive the simulator.
    pub fn with_actions(
        config: DqnConfig,
        input_dim: usize,
        actions: usize,
        discount: f64,
        schedule: EpsilonSchedule,
        seed: u64,
    ) -> Result<Self> {
        let mut init = RngStream::new(seed, "nn-init");
        let online = Mlp::new(&config.layer_sizes(input_dim, actions), &mut init)?;
        Ok(Self::from_net(config, online, discount, schedule, seed))
    }

    fn from_net(
        config: DqnConfig,
        online: Mlp,
        discount: f64,
        schedule: EpsilonSchedule,
        seed: u64,
    ) -> Self {
        Self {
            adam: Adam::new(config.optimizer, online.param_count()),
            buffer: ReplayBuffer::new(config.buffer_capacity),
            target: online.clone(),
            online,
            config,
            discount,
            schedule,
            explore: RngStream::new(seed, "dqn-explore"),
            sampler: RngStream::new(seed, "dqn-replay"),
            mode: Mode::Training,
            decisions: 0,
            stored: 0,
            train_steps: 0,
        }
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    pub fn q_values(&self, state: &StateVector) -> Result<Vec<f64>> {
        self.online.forward(state.as_slice())
    }

    pub fn select(&mut self, state: &StateVector) -> Result<usize> {
        let q = self.q_values(state)?;
        let i = match self.mode {
            Mode::Evaluation => argmax(&q),
            Mode::Training => {
                let eps = self.schedule.value(self.decisions);
                self.decisions += 1;
                epsilon_greedy_select(&q, eps, &mut self.explore)
            }
        };
        Ok(i)
    }

    /// TD target for one transition.
    pub fn target_value(&self, t: &Transition) -> Result<f64> {
        if t.done {
            return Ok(t.reward);
        }
        let next = self.target.forward(t.next_state.as_slice())?;
        Ok(t.reward + self.discount * next[argmax(&next)])
    }

    /// One minibatch update. Returns the mean Huber loss, or 0 without
    /// touching any parameter while the buffer holds fewer than a batch.
    pub fn train_step(&mut self) -> Result<f64> {
        let Some(batch) = self
            .buffer
            .sample(self.config.batch_size, &mut self.sampler)
        else {
            return Ok(0.0);
        };
        let n = batch.len() as f64;
        let mut grads = vec![0.0; self.online.param_count()];
        let mut loss = 0.0;
        let mut out_grad = vec![0.0; self.online.output_dim()];
        for t in batch {
            let y = self.target_value(t)?;
            let trace = self.online.forward_trace(t.state.as_slice())?;
            let (l, g) = huber_loss(trace.output()[t.action], y, self.config.huber_delta);
            loss += l / n;
            out_grad.fill(0.0);
            out_grad[t.action] = g / n;
            self.online.backward(&trace, &out_grad, &mut grads)?;
        }
        self.adam.step(&mut self.online, &grads)?;
        self.train_steps += 1;
        if self.train_steps % self.config.target_sync_interval == 0 {
            self.target = self.online.clone();
        }
        Ok(loss)
    }

    pub fn observe(&mut self, t: &Transition) -> Result<Option<f64>> {
        if self.mode != Mode::Training {
            return Ok(None);
        }
        self.buffer.push(t.clone());
        self.stored += 1;
        if self.stored % self.config.train_every == 0 {
            return self.train_step().map(Some);
        }
        Ok(None)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.online.save(path)
    }

    /// Restores an agent in evaluation mode from a saved online network.
    pub fn load(path: &Path, config: DqnConfig, input_dim: usize, discount: f64) -> Result<Self> {
        let net = Mlp::load(path)?;
        let expected = config.layer_sizes(input_dim, Action::COUNT);
        if net.layer_sizes() != expected.as_slice() {
            return Err(Error::Artifact(format!(
                "network layers {:?} do not match configured {:?}",
                net.layer_sizes(),
                expected
            )));
        }
        let mut agent = Self::from_net(config, net, discount, EpsilonSchedule::default(), 0);
        agent.mode = Mode::Evaluation;
        Ok(agent)
    }
}

impl Policy for DqnAgent {
    fn name(&self) -> &'static str {
        "dqn"
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Action {
        // The input dimension is fixed by the topology the agent was built for.
        Action::ALL[self
            .select(ctx.state)
            .expect("state dimension matches the network")]
    }

    fn learn(&mut self, transition: &Transition) -> Result<()> {
        self.observe(transition).map(|_| ())
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    fn is_learner(&self) -> bool {
        true
    }
}
