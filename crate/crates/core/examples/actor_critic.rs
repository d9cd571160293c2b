//! Actor-critic on a two-armed bandit, then on the simulator.

use fogrl::config::ExperimentConfig;
use fogrl::env::{StateKey, StateVector, Transition};
use fogrl::harness::{run_eval, run_training, PolicyKind};
use fogrl::policies::{ActorCriticAgent, ActorCriticConfig};

fn main() -> fogrl::Result<()> {
    let state = StateVector(vec![1.0]);
    let key = StateKey {
        origin: 0,
        size: 0,
        deadline: 0,
        loads: [0; 3],
    };
    let mut agent = ActorCriticAgent::with_actions(ActorCriticConfig::default(), 1, 2, 0.9, 7)?;
    for step in 0..=3000 {
        let action = agent.select(&state)?;
        let t = Transition {
            state: state.clone(),
            key,
            action,
            reward: if action == 0 { 1.0 } else { 0.0 },
            next_state: state.clone(),
            next_key: key,
            done: true,
        };
        agent.train_step(&t)?;
        if step % 500 == 0 {
            let (p, v) = agent.evaluate(&state)?;
            println!("step {step:>4}: p(arm 0) {:.3}, value {:+.3}", p[0], v);
        }
    }

    let mut cfg = ExperimentConfig::default();
    cfg.run.training_episodes = 10;
    cfg.run.eval_s = 60.0;
    let mut trained = run_training(&cfg, PolicyKind::ActorCritic, 3)?;
    let m = run_eval(&cfg, &mut trained.agent, 3)?.record;
    println!(
        "simulator: success {:.1}%, jain {:.3}",
        m.success_rate.unwrap_or(0.0) * 100.0,
        m.load_balance_jain
    );
    Ok(())
}
