//! Batch assignment with the Hungarian solver, on a raw cost matrix and
//! inside the simulator with a few epoch lengths.

use fogrl::config::ExperimentConfig;
use fogrl::harness::{run_eval, Agent, PolicyKind};
use fogrl::policies::hungarian;

fn main() -> fogrl::Result<()> {
    // Three tasks, four columns (fog slots plus the cloud).
    let cost = vec![
        vec![0.12, 0.30, 0.25, 0.40],
        vec![0.10, 0.11, 0.50, 0.40],
        vec![0.35, 0.20, 0.15, 0.40],
    ];
    let (assignment, total) = hungarian::solve(&cost);
    println!("assignment {assignment:?}, total cost {total:.2}");

    let mut cfg = ExperimentConfig::default();
    cfg.run.eval_s = 60.0;
    for epoch in [0.02, 0.05, 0.1, 0.2] {
        cfg.policies.optimization.epoch_s = epoch;
        let mut agent = Agent::new(PolicyKind::Optimization, &cfg, 1)?;
        let m = run_eval(&cfg, &mut agent, 1)?.record;
        println!(
            "epoch {:>4.0} ms: latency {:.1} ms, success {:.1}%, jain {:.3}",
            epoch * 1e3,
            m.avg_latency.unwrap_or(f64::NAN) * 1e3,
            m.success_rate.unwrap_or(f64::NAN) * 100.0,
            m.load_balance_jain
        );
    }
    Ok(())
}
