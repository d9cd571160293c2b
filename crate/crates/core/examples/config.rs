//! Build a config from partial JSON, validate it, and show a rejected one.

use fogrl::config::ExperimentConfig;

fn main() -> fogrl::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{
            "world": { "topology": { "zones": 4 }, "fleet": { "vehicles": 40 } },
            "run": { "training_episodes": 5, "seeds": [10, 11, 12] }
        }"#,
    )?;
    println!("{}", cfg.to_json());
    println!(
        "expected training decisions: {:.0}",
        cfg.expected_training_decisions()
    );

    let bad = ExperimentConfig::from_json(r#"{ "world": { "links": { "v2r_mbps": -1 } } }"#);
    match bad {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected (exit code {}): {e}", e.exit_code()),
    }
    Ok(())
}
