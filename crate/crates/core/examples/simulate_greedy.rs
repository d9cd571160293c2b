//! Run the greedy baseline on one seed and print its metrics record.
//!
//! ```bash
//! cargo run --release --example simulate_greedy -- 3
//! ```

use fogrl::config::ExperimentConfig;
use fogrl::harness::{run_eval, Agent, PolicyKind};

fn main() -> fogrl::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let mut cfg = ExperimentConfig::default();
    cfg.run.eval_s = 60.0;

    let mut agent = Agent::new(PolicyKind::Greedy, &cfg, seed)?;
    let r = run_eval(&cfg, &mut agent, seed)?;
    let m = &r.record;
    println!(
        "seed {seed}: {} decisions, trace digest {:016x}",
        r.decisions, r.trace_digest
    );
    println!(
        "generated {} completed {} missed {} rejected {} in flight {}",
        m.generated, m.completed, m.missed, m.rejected, m.in_flight
    );
    if let (Some(lat), Some(ok)) = (m.avg_latency, m.success_rate) {
        println!(
            "avg latency {:.1} ms, success {:.1}%",
            lat * 1e3,
            ok * 100.0
        );
    }
    println!(
        "jain {:.3}, mean utilization {:.3}",
        m.load_balance_jain, m.mean_utilization
    );
    for (i, u) in m.node_utilization.iter().enumerate() {
        println!("  fog {i}: {:.3}", u);
    }
    Ok(())
}
