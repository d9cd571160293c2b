//! Event loop tying the kernel, the world, a policy and the metrics together.
//!
//! A decision is made when a task arrives (or at the next decision epoch for
//! batch policies). Its reward is known only when the task resolves, so the
//! transition for decision `k` is emitted once both its reward and decision
//! `k + 1` exist, with the observation at `k + 1` as the next state.

use crate::env::{
    compute_reward, discretize, observe, EnvConfig, RewardInput, StateKey, StateVector, Transition,
};
use crate::error::{Error, Result};
use crate::metrics::{jain_index, MetricsCollector, MetricsRecord};
use crate::policies::{DecisionContext, Mode, Policy};
use crate::sim::{mix64, EventKind, Scheduler};
use crate::world::{Admission, World, WorldConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodePlan {
    pub horizon: f64,
    /// Seeds node hardware.
    pub topology_seed: u64,
    /// Seeds fleet, arrivals, task draws and mobility.
    pub run_seed: u64,
    /// Label stored in the metrics record.
    pub record_seed: u64,
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub record: MetricsRecord,
    /// Sum of per-task rewards over resolved decisions.
    pub reward_sum: f64,
    pub resolved: usize,
    pub decisions: usize,
    pub transitions: usize,
    /// Running hash of every popped event.
    pub trace_digest: u64,
    pub conservation_checks: usize,
    pub world: World,
}

impl EpisodeResult {
    pub fn mean_reward(&self) -> f64 {
        if self.resolved == 0 {
            0.0
        } else {
            self.reward_sum / self.resolved as f64
        }
    }
}

struct Decision {
    state: StateVector,
    key: StateKey,
    action: usize,
    reward: Option<f64>,
    emitted: bool,
}

struct Driver<'a> {
    sched: Scheduler,
    world: World,
    metrics: MetricsCollector,
    env: &'a EnvConfig,
    policy: &'a mut dyn Policy,
    learning: bool,
    decisions: Vec<Decision>,
    decision_of_task: Vec<Option<usize>>,
    batch: Vec<usize>,
    reward_sum: f64,
    resolved: usize,
    transitions: usize,
    digest: u64,
    checks: usize,
}

fn kind_code(kind: EventKind) -> u64 {
    match kind {
        EventKind::TaskArrival { vehicle } => 1 | (vehicle as u64) << 8,
        EventKind::TransmissionDone { task } => 2 | (task as u64) << 8,
        EventKind::ProcessingDone { task } => 3 | (task as u64) << 8,
        EventKind::VehicleHandover { vehicle } => 4 | (vehicle as u64) << 8,
        EventKind::DecisionEpoch => 5,
        EventKind::MetricsSample => 6,
    }
}

impl<'a> Driver<'a> {
    fn decide_now(&mut self, task: usize) -> Result<()> {
        let now = self.sched.now();
        let state = observe(&self.world, task, now, self.env);
        let key = discretize(&state);
        let action = self.policy.decide(&DecisionContext {
            world: &self.world,
            task,
            now,
            state: &state,
            key: &key,
        });
        if self.learning {
            let k = self.decisions.len();
            self.decision_of_task[task] = Some(k);
            self.decisions.push(Decision {
                state,
                key,
                action: action.index(),
                reward: None,
                emitted: false,
            });
            if k > 0 && self.decisions[k - 1].reward.is_some() {
                self.emit(k - 1, false)?;
            }
        }
        let tx_done = self.world.dispatch(task, action, now);
        self.sched
            .schedule(tx_done, EventKind::TransmissionDone { task })?;
        Ok(())
    }

    fn emit(&mut self, k: usize, done: bool) -> Result<()> {
        let d = &self.decisions[k];
        if d.emitted {
            return Ok(());
        }
        let Some(reward) = d.reward else {
            return Ok(());
        };
        let (next_state, next_key) = if done {
            (d.state.clone(), d.key)
        } else {
            let n = &self.decisions[k + 1];
            (n.state.clone(), n.key)
        };
        let t = Transition {
            state: d.state.clone(),
            key: d.key,
            action: d.action,
            reward,
            next_state,
            next_key,
            done,
        };
        self.decisions[k].emitted = true;
        self.transitions += 1;
        self.policy.learn(&t)
    }

    fn settle(&mut self, task: usize) -> Result<()> {
        let now = self.sched.now();
        self.metrics.record_outcome(&self.world.tasks[task])?;
        if !self.learning {
            return Ok(());
        }
        let t = &self.world.tasks[task];
        let input = RewardInput {
            outcome: t.outcome,
            latency: t.latency(),
            deadline: t.deadline,
            balance: jain_index(&self.world.busy_shares(now)),
        };
        let r = compute_reward(&input, &self.env.reward, self.env.delay_cap);
        self.reward_sum += r;
        self.resolved += 1;
        if let Some(k) = self.decision_of_task[task] {
            self.decisions[k].reward = Some(r);
            if k + 1 < self.decisions.len() {
                self.emit(k, false)?;
            }
        }
        Ok(())
    }

    fn check_conservation(&mut self) -> Result<()> {
        let c = self.metrics.counts();
        let accounted =
            c.completed + c.missed + c.rejected + self.batch.len() + self.world.tasks_at_servers();
        let w = self.world.counts();
        if c.generated != accounted || w != c {
            return Err(Error::Conservation {
                time: self.sched.now(),
                generated: c.generated,
                accounted,
            });
        }
        self.checks += 1;
        Ok(())
    }

    fn handle(&mut self, kind: EventKind) -> Result<()> {
        let now = self.sched.now();
        match kind {
            EventKind::TaskArrival { vehicle } => {
                let task = self.world.create_task(vehicle, now);
                self.metrics.note_generated();
                self.decision_of_task.push(None);
                if let Some(gap) = self.world.next_arrival_gap(vehicle) {
                    self.sched
                        .schedule(now + gap, EventKind::TaskArrival { vehicle })?;
                }
                if self.policy.epoch().is_some() {
                    self.batch.push(task);
                } else {
                    self.decide_now(task)?;
                }
            }
            EventKind::DecisionEpoch => {
                if !self.batch.is_empty() {
                    let batch = std::mem::take(&mut self.batch);
                    let actions = self.policy.decide_batch(&self.world, &batch, now);
                    for (&task, &action) in batch.iter().zip(&actions) {
                        let tx_done = self.world.dispatch(task, action, now);
                        self.sched
                            .schedule(tx_done, EventKind::TransmissionDone { task })?;
                    }
                }
                if let Some(dt) = self.policy.epoch() {
                    self.sched.schedule(now + dt, EventKind::DecisionEpoch)?;
                }
            }
            EventKind::TransmissionDone { task } => match self.world.enqueue_task(task, now) {
                Admission::Accepted { done_at } => {
                    self.sched
                        .schedule(done_at, EventKind::ProcessingDone { task })?;
                }
                Admission::Rejected => self.settle(task)?,
            },
            EventKind::ProcessingDone { task } => {
                self.world.complete_task(task, now);
                self.settle(task)?;
            }
            EventKind::VehicleHandover { vehicle } => {
                let next = self.world.advance_vehicle(vehicle, now);
                self.sched
                    .schedule(next, EventKind::VehicleHandover { vehicle })?;
            }
            EventKind::MetricsSample => {
                self.check_conservation()?;
                self.metrics.sample(&self.world, now);
                self.sched
                    .schedule(now + self.env.sample_interval_s, EventKind::MetricsSample)?;
            }
        }
        Ok(())
    }
}

/// Runs one episode of `plan.horizon` seconds on a fresh world.
pub fn run_episode(
    world_cfg: &WorldConfig,
    env: &EnvConfig,
    policy: &mut dyn Policy,
    plan: EpisodePlan,
) -> Result<EpisodeResult> {
    let mut world = World::new(
        world_cfg,
        plan.topology_seed,
        plan.run_seed,
        env.balance_window_s,
    )?;
    let mut sched = Scheduler::new(plan.horizon);
    for (t, kind) in world.initial_events() {
        sched.schedule(t, kind)?;
    }
    sched.schedule(env.sample_interval_s, EventKind::MetricsSample)?;
    if let Some(dt) = policy.epoch() {
        sched.schedule(dt, EventKind::DecisionEpoch)?;
    }
    let learning = policy.is_learner() && policy.mode() == Mode::Training;
    let mut d = Driver {
        sched,
        world,
        metrics: MetricsCollector::new(),
        env,
        policy,
        learning,
        decisions: Vec::new(),
        decision_of_task: Vec::new(),
        batch: Vec::new(),
        reward_sum: 0.0,
        resolved: 0,
        transitions: 0,
        digest: 0,
        checks: 0,
    };
    while let Some(ev) = d.sched.pop_next() {
        d.digest = mix64(d.digest ^ ev.fire_time.to_bits() ^ kind_code(ev.kind).rotate_left(17));
        d.handle(ev.kind)?;
    }
    d.check_conservation()?;
    if let Some(last) = d.decisions.len().checked_sub(1) {
        d.emit(last, true)?;
    }
    let record = d
        .metrics
        .finish(&d.world, plan.horizon, d.policy.name(), plan.record_seed);
    let decisions = d
        .world
        .tasks
        .iter()
        .filter(|t| t.decided_at.is_some())
        .count();
    Ok(EpisodeResult {
        record,
        reward_sum: d.reward_sum,
        resolved: d.resolved,
        decisions,
        transitions: d.transitions,
        trace_digest: d.digest,
        conservation_checks: d.checks,
        world: d.world,
    })
}
