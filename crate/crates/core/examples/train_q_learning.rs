//! Train a tabular Q-learning agent, print its reward curve and save the table.

use fogrl::config::ExperimentConfig;
use fogrl::harness::{run_eval, run_training, Agent, PolicyKind};

fn main() -> fogrl::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.run.training_episodes = 20;
    cfg.run.eval_s = 60.0;

    let mut trained = run_training(&cfg, PolicyKind::QLearning, 1)?;
    for s in trained.curve.iter().step_by(4) {
        println!(
            "episode {:>3}: {:>5} decisions, mean reward {:+.3}",
            s.episode, s.decisions, s.mean_reward
        );
    }
    if let Agent::QLearning(q) = &trained.agent {
        println!("visited states: {}", q.table.len());
    }
    let path = std::env::temp_dir().join("fogrl-q-table.csv");
    trained.agent.save(&path)?;
    println!("saved {}", path.display());

    let m = run_eval(&cfg, &mut trained.agent, 1)?.record;
    println!("eval success {:.1}%", m.success_rate.unwrap_or(0.0) * 100.0);
    Ok(())
}
