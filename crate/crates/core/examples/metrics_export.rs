//! Metrics helpers and the CSV round trip.

use fogrl::config::ExperimentConfig;
use fogrl::harness::{run_eval, Agent, PolicyKind};
use fogrl::metrics::{balance_category, jain_index, read_csv, variance, write_csv};

fn main() -> fogrl::Result<()> {
    for loads in [
        vec![1.0, 1.0, 1.0, 1.0],
        vec![4.0, 0.0, 0.0, 0.0],
        vec![3.0, 2.0, 1.0, 2.0],
    ] {
        let j = jain_index(&loads);
        println!(
            "{loads:?}: jain {j:.3} ({}), variance {:.3}",
            balance_category(j),
            variance(&loads)
        );
    }

    let mut cfg = ExperimentConfig::default();
    cfg.run.eval_s = 30.0;
    let mut records = Vec::new();
    for kind in [PolicyKind::Greedy, PolicyKind::Optimization] {
        let mut agent = Agent::new(kind, &cfg, 4)?;
        records.push(run_eval(&cfg, &mut agent, 4)?.record);
    }
    let mut buf = Vec::new();
    write_csv(&records, &mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));
    assert_eq!(read_csv(buf.as_slice())?, records);
    Ok(())
}
