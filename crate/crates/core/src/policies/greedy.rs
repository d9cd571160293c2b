//! Myopic baseline: send each task wherever its own predicted latency is lowest.

use super::{argmin, DecisionContext, Policy};
use crate::world::{Action, World};

#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl Greedy {
    /// Predicted latency of each action, in `Action::ALL` order.
    pub fn predictions(world: &World, task: usize, now: f64) -> [f64; Action::COUNT] {
        Action::ALL.map(|a| world.predicted_completion_latency(task, a, now))
    }

    pub fn choose(world: &World, task: usize, now: f64) -> Action {
        let p = Self::predictions(world, task, now);
        Action::ALL[argmin(&p)]
    }
}

impl Policy for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Action {
        Self::choose(ctx.world, ctx.task, ctx.now)
    }
}
