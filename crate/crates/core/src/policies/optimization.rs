//! Batch baseline: every decision epoch, jointly assign the waiting tasks to
//! fog-node slots (or the cloud) minimizing total predicted latency.
//!
//! Each fog node offers `slots_per_node` slots per epoch; slot `k` on a node
//! carries `k` times the batch's mean processing time there, standing in for
//! waiting behind the tasks placed in earlier slots. The cloud offers one
//! slot per task, so the problem is always feasible.

use serde::{Deserialize, Serialize};

use super::{hungarian, DecisionContext, Policy};
use crate::error::{Error, Result};
use crate::world::{Action, Target, World};

const UNREACHABLE: f64 = 1.0e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizationConfig {
    pub epoch_s: f64,
    pub slots_per_node: usize,
    /// Count work already routed to a node but still in transit.
    pub count_in_transit: bool,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            epoch_s: 0.1,
            slots_per_node: 2,
            count_in_transit: true,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epoch_s > 0.0) || !self.epoch_s.is_finite() {
            return Err(Error::config(
                "policies.optimization.epoch_s",
                "must be positive",
            ));
        }
        if self.slots_per_node == 0 {
            return Err(Error::config(
                "policies.optimization.slots_per_node",
                "must be at least 1",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct OptimizationPolicy {
    pub config: OptimizationConfig,
}

/// Column of the assignment problem.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Fog { node: usize, rank: usize },
    Cloud,
}

impl OptimizationPolicy {
    pub fn new(config: OptimizationConfig) -> Self {
        Self { config }
    }

    /// Predicted latency of `task` under `action`, optionally counting in-transit work.
    pub fn predicted_latency(&self, world: &World, task: usize, action: Action, now: f64) -> f64 {
        let t = &world.tasks[task];
        let (target, route) = world.resolve(t.origin_zone, action);
        if !self.config.count_in_transit {
            return world.predicted_completion_latency(task, action, now);
        }
        let uplink = world.link.transmission_delay(t.size_bits(), route);
        let free_at = match target {
            Target::Fog(n) => {
                let node = &world.nodes[n];
                if node.in_transit_work > 0.0 {
                    node.busy_until.max(now) + node.in_transit_work
                } else {
                    node.busy_until
                }
            }
            Target::Cloud => world.cloud.busy_until,
        };
        let wait = (free_at - now - uplink).max(0.0);
        (now - t.created_at)
            + uplink
            + wait
            + world.processing_time(task, target)
            + world.link.downlink_delay(route, false)
    }

    /// Cheapest action reaching fog node `node` from the task's origin, if any.
    fn best_action_to(
        &self,
        world: &World,
        task: usize,
        node: usize,
        now: f64,
    ) -> Option<(Action, f64)> {
        let origin = world.tasks[task].origin_zone;
        let mut best: Option<(Action, f64)> = None;
        for a in [Action::Local, Action::Left, Action::Right] {
            if world.resolve(origin, a).0 != Target::Fog(node) {
                continue;
            }
            let c = self.predicted_latency(world, task, a, now);
            if best.map_or(true, |(_, b)| c < b) {
                best = Some((a, c));
            }
        }
        best
    }

    /// Builds the padded cost matrix and solves it; returns per-task actions
    /// and the optimal total cost.
    pub fn assign(&self, world: &World, tasks: &[usize], now: f64) -> (Vec<Action>, f64) {
        if tasks.is_empty() {
            return (Vec::new(), 0.0);
        }
        let s = self.config.slots_per_node;
        let mut slots = Vec::with_capacity(world.nodes.len() * s + tasks.len());
        for node in 0..world.nodes.len() {
            for rank in 0..s {
                slots.push(Slot::Fog { node, rank });
            }
        }
        slots.extend(std::iter::repeat(Slot::Cloud).take(tasks.len()));

        // Mean processing time of the batch on each node, used as the slot-rank penalty.
        let penalty: Vec<f64> = (0..world.nodes.len())
            .map(|n| {
                tasks
                    .iter()
                    .map(|&t| world.processing_time(t, Target::Fog(n)))
                    .sum::<f64>()
                    / tasks.len() as f64
            })
            .collect();

        let mut actions_for = Vec::with_capacity(tasks.len());
        let cost: Vec<Vec<f64>> = tasks
            .iter()
            .map(|&t| {
                let reach: Vec<Option<(Action, f64)>> = (0..world.nodes.len())
                    .map(|n| self.best_action_to(world, t, n, now))
                    .collect();
                let cloud = self.predicted_latency(world, t, Action::Cloud, now);
                let row = slots
                    .iter()
                    .map(|slot| match *slot {
                        Slot::Fog { node, rank } => reach[node]
                            .map(|(_, c)| c + rank as f64 * penalty[node])
                            .unwrap_or(UNREACHABLE),
                        Slot::Cloud => cloud,
                    })
                    .collect();
                actions_for.push(reach);
                row
            })
            .collect();

        let (cols, total) = hungarian::solve(&cost);
        let actions = cols
            .iter()
            .zip(&actions_for)
            .map(|(&c, reach)| match slots[c] {
                Slot::Fog { node, .. } => reach[node].map(|(a, _)| a).unwrap_or(Action::Cloud),
                Slot::Cloud => Action::Cloud,
            })
            .collect();
        (actions, total)
    }

    /// Total cost of filling slots one task at a time, each taking its cheapest free slot.
    pub fn sequential_cost(&self, world: &World, tasks: &[usize], now: f64) -> f64 {
        let s = self.config.slots_per_node;
        let mut used = vec![0usize; world.nodes.len()];
        let penalty: Vec<f64> = (0..world.nodes.len())
            .map(|n| {
                tasks
                    .iter()
                    .map(|&t| world.processing_time(t, Target::Fog(n)))
                    .sum::<f64>()
                    / tasks.len().max(1) as f64
            })
            .collect();
        let mut total = 0.0;
        for &t in tasks {
            let mut best = self.predicted_latency(world, t, Action::Cloud, now);
            let mut pick = None;
            for n in 0..world.nodes.len() {
                if used[n] >= s {
                    continue;
                }
                if let Some((_, c)) = self.best_action_to(world, t, n, now) {
                    let c = c + used[n] as f64 * penalty[n];
                    if c < best {
                        best = c;
                        pick = Some(n);
                    }
                }
            }
            if let Some(n) = pick {
                used[n] += 1;
            }
            total += best;
        }
        total
    }
}

impl Policy for OptimizationPolicy {
    fn name(&self) -> &'static str {
        "optimization"
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Action {
        self.decide_batch(ctx.world, &[ctx.task], ctx.now)[0]
    }

    fn epoch(&self) -> Option<f64> {
        Some(self.config.epoch_s)
    }

    fn decide_batch(&mut self, world: &World, tasks: &[usize], now: f64) -> Vec<Action> {
        if let [only] = tasks {
            // A single task takes its cheapest action; lowest index wins ties.
            let costs = Action::ALL.map(|a| self.predicted_latency(world, *only, a, now));
            return vec![Action::ALL[super::argmin(&costs)]];
        }
        self.assign(world, tasks, now).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::Greedy;
    use crate::sim::RngStream;
    use crate::world::WorldConfig;

    fn world(seed: u64) -> World {
        World::new(&WorldConfig::default(), seed, seed, 5.0).unwrap()
    }

    #[test]
    fn single_task_matches_greedy_when_nothing_in_transit() {
        for seed in 0..30 {
            let mut w = world(seed);
            let mut rng = RngStream::new(seed, "test");
            for n in &mut w.nodes {
                n.busy_until = rng.uniform() * 0.4;
            }
            let t = w.create_task(rng.index(w.vehicles.len()), 0.0);
            let mut opt = OptimizationPolicy::default();
            assert_eq!(
                opt.decide_batch(&w, &[t], 0.0)[0],
                Greedy::choose(&w, t, 0.0)
            );
        }
    }

    #[test]
    fn joint_assignment_beats_sequential() {
        for seed in 0..40 {
            let mut w = world(seed);
            let mut rng = RngStream::new(seed, "batch");
            for n in &mut w.nodes {
                n.busy_until = rng.uniform() * 0.3;
            }
            let batch: Vec<usize> = (0..2 + rng.index(10))
                .map(|_| w.create_task(rng.index(w.vehicles.len()), 0.0))
                .collect();
            let opt = OptimizationPolicy::default();
            let (actions, total) = opt.assign(&w, &batch, 0.0);
            assert_eq!(actions.len(), batch.len());
            assert!(total <= opt.sequential_cost(&w, &batch, 0.0) + 1e-9);
            let mut per_node = vec![0; w.nodes.len()];
            for (&t, &a) in batch.iter().zip(&actions) {
                if let Target::Fog(n) = w.resolve(w.tasks[t].origin_zone, a).0 {
                    per_node[n] += 1;
                }
            }
            assert!(per_node.iter().all(|&c| c <= opt.config.slots_per_node));
        }
    }
}
