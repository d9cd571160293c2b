//! Config parsing, metrics export and comparison outputs.

use fogrl::config::ExperimentConfig;
use fogrl::harness::{run_compare, write_comparison, PolicyKind};
use fogrl::metrics::{read_csv, CSV_HEADER};
use fogrl::Error;

fn small() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.world.topology.zones = 3;
    cfg.world.fleet.vehicles = 20;
    cfg.run.training_episodes = 2;
    cfg.run.episode_s = 5.0;
    cfg.run.eval_s = 10.0;
    cfg.run.seeds = vec![1, 2, 3, 4, 5];
    cfg
}

#[test]
fn empty_config_is_the_default() {
    assert_eq!(
        ExperimentConfig::from_json("{}").unwrap(),
        ExperimentConfig::default()
    );
}

#[test]
fn config_round_trips_through_json() {
    let cfg = small();
    assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
}

#[test]
fn bad_configs_name_the_field() {
    for (text, field) in [
        (
            r#"{"world":{"topology":{"zones":0}}}"#,
            "world.topology.zones",
        ),
        (
            r#"{"world":{"fleet":{"arrival_rate":-1}}}"#,
            "world.fleet.arrival_rate",
        ),
        (r#"{"run":{"seeds":[]}}"#, "run.seeds"),
    ] {
        match ExperimentConfig::from_json(text) {
            Err(e @ Error::Config { .. }) => {
                assert!(e.to_string().contains(field), "{e}");
                assert_eq!(e.exit_code(), 1);
            }
            other => panic!("{text}: {other:?}"),
        }
    }
    let e = ExperimentConfig::from_json(r#"{"world":{"nope":1}}"#).unwrap_err();
    assert!(matches!(e, Error::ConfigParse(_)), "{e:?}");
}

#[test]
fn compare_needs_three_seeds() {
    let mut cfg = small();
    cfg.run.seeds = vec![1, 2];
    assert!(run_compare(&cfg, &PolicyKind::ALL, 1).is_err());
}

#[test]
fn comparison_writes_one_row_per_run() {
    let cfg = small();
    let cmp = run_compare(&cfg, &PolicyKind::ALL, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_comparison(&cmp, &cfg, dir.path()).unwrap();

    let text = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 5 * 5);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let records = read_csv(text.as_bytes()).unwrap();
    assert_eq!(records, cmp.records);

    for name in [
        "metrics.json",
        "report.json",
        "plot_latency.csv",
        "plot_success.csv",
        "config.effective.json",
    ] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    assert_eq!(cmp.report.policies.len(), 5);
    for s in &cmp.report.policies {
        assert_eq!(s.runs, 5);
    }
}
