//! Train a DQN agent and reload its weights for evaluation.

use fogrl::config::ExperimentConfig;
use fogrl::harness::{run_eval, run_training, Agent, PolicyKind};

fn main() -> fogrl::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.run.training_episodes = 10;
    cfg.run.eval_s = 60.0;

    let trained = run_training(&cfg, PolicyKind::Dqn, 2)?;
    if let Agent::Dqn(d) = &trained.agent {
        println!(
            "{} gradient steps, layers {:?}",
            d.train_steps(),
            d.online.layer_sizes()
        );
    }
    let last = trained.curve.last().expect("at least one episode");
    println!("last episode mean reward {:+.3}", last.mean_reward);

    let path = std::env::temp_dir().join("fogrl-dqn.mlp");
    trained.agent.save(&path)?;
    let mut loaded = Agent::load(PolicyKind::Dqn, &path, &cfg)?;
    let m = run_eval(&cfg, &mut loaded, 2)?.record;
    println!(
        "reloaded eval: latency {:.1} ms, success {:.1}%",
        m.avg_latency.unwrap_or(f64::NAN) * 1e3,
        m.success_rate.unwrap_or(0.0) * 100.0
    );
    Ok(())
}
