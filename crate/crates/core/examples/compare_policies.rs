//! Train and evaluate all five policies over three seeds and write the
//! comparison outputs.
//!
//! ```bash
//! cargo run --release --example compare_policies -- out/compare
//! ```

use std::path::PathBuf;

use fogrl::config::ExperimentConfig;
use fogrl::harness::{run_compare, write_comparison, PolicyKind};

fn main() -> fogrl::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("fogrl-compare"), PathBuf::from);
    let mut cfg = ExperimentConfig::default();
    cfg.run.seeds = vec![1, 2, 3];
    cfg.run.training_episodes = 10;
    cfg.run.eval_s = 60.0;

    let cmp = run_compare(&cfg, &PolicyKind::ALL, 2)?;
    write_comparison(&cmp, &cfg, &out)?;
    print!("{}", cmp.report.to_table());
    for imp in &cmp.report.improvement_vs_greedy {
        println!(
            "{:<13} latency {:+.1}%  success {:+.1} pp  jain {:+.3}",
            imp.policy,
            imp.latency_reduction.unwrap_or(f64::NAN) * 100.0,
            imp.success_gain_pp.unwrap_or(f64::NAN),
            imp.jain_gain
        );
    }
    println!("outputs in {}", out.display());
    Ok(())
}
