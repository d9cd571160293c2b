use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fogrl::config::{load_config, ExperimentConfig};
use fogrl::harness::{
    artifact_path, run_compare, run_eval, run_training, write_comparison, write_config_echo,
    write_curve_csv, Agent, PolicyKind,
};
use fogrl::metrics::{export_csv, export_json, MetricsRecord};
use fogrl::{Error, Result};

/// Overrides `--out-dir` when set.
const OUT_DIR_ENV: &str = "FOGRL_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "fogrl",
    version,
    about = "Vehicular multi-fog offloading simulator"
)]
struct Cli {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed; repeat to override the seed list for `compare`.
    #[arg(long, global = true)]
    seed: Vec<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// greedy, optimization, q-learning, dqn or actor-critic.
    #[arg(long, global = true)]
    policy: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train if needed, then evaluate one policy on one seed.
    Run,
    /// Train a learner and save its artifact and reward curve.
    Train,
    /// Evaluate a baseline or a saved learner.
    Eval {
        /// Saved learner; defaults to the artifact `train` writes.
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    /// Train and evaluate all five policies across seeds.
    Compare {
        /// Worker threads; overrides `run.threads`.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate the config, then print the effective version.
    ValidateConfig,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| cli.out_dir.clone(), PathBuf::from)
}

fn policy(cli: &Cli) -> Result<PolicyKind> {
    cli.policy
        .as_deref()
        .ok_or_else(|| Error::config("--policy", "required for this subcommand"))?
        .parse()
}

fn single_seed(cli: &Cli, cfg: &ExperimentConfig) -> Result<u64> {
    match cli.seed.as_slice() {
        [] => Ok(cfg.run.seeds[0]),
        [s] => Ok(*s),
        _ => Err(Error::config(
            "--seed",
            "give a single seed for this subcommand",
        )),
    }
}

fn write_record(dir: &Path, record: &MetricsRecord) -> Result<()> {
    let records = std::slice::from_ref(record);
    export_csv(records, &dir.join("metrics.csv"))?;
    export_json(records, &dir.join("metrics.json"))?;
    println!("{}", serde_json::to_string_pretty(record)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    let out = out_dir(&cli);
    match &cli.command {
        Command::ValidateConfig => {
            println!("{}", cfg.to_json());
        }
        Command::Run => {
            let kind = policy(&cli)?;
            let seed = single_seed(&cli, &cfg)?;
            let dir = out.join(format!("run-{kind}-seed{seed}"));
            write_config_echo(&cfg, &dir)?;
            let mut agent = if kind.is_learner() {
                let t = run_training(&cfg, kind, seed)?;
                write_curve_csv(&t.curve, &dir.join("curve.csv"))?;
                if let Some(p) = artifact_path(&dir, kind, seed) {
                    t.agent.save(&p)?;
                }
                t.agent
            } else {
                Agent::new(kind, &cfg, seed)?
            };
            let r = run_eval(&cfg, &mut agent, seed)?;
            write_record(&dir, &r.record)?;
        }
        Command::Train => {
            let kind = policy(&cli)?;
            let seed = single_seed(&cli, &cfg)?;
            let t = run_training(&cfg, kind, seed)?;
            write_config_echo(&cfg, &out)?;
            let path = artifact_path(&out, kind, seed).expect("learners have artifacts");
            t.agent.save(&path)?;
            let curve = out.join(format!("{kind}-seed{seed}-curve.csv"));
            write_curve_csv(&t.curve, &curve)?;
            println!("artifact: {}", path.display());
            println!("curve: {}", curve.display());
        }
        Command::Eval { artifact } => {
            let kind = policy(&cli)?;
            let seed = single_seed(&cli, &cfg)?;
            let mut agent = if kind.is_learner() {
                let path = match artifact {
                    Some(p) => p.clone(),
                    None => artifact_path(&out, kind, seed).expect("learners have artifacts"),
                };
                Agent::load(kind, &path, &cfg).map_err(|e| match e {
                    Error::Io { .. } => e,
                    other => Error::Artifact(format!("{}: {other}", path.display())),
                })?
            } else {
                Agent::new(kind, &cfg, seed)?
            };
            let r = run_eval(&cfg, &mut agent, seed)?;
            let dir = out.join(format!("eval-{kind}-seed{seed}"));
            write_config_echo(&cfg, &dir)?;
            write_record(&dir, &r.record)?;
        }
        Command::Compare { threads } => {
            if !cli.seed.is_empty() {
                cfg.run.seeds = cli.seed.clone();
                cfg.validate()?;
            }
            let kinds = match &cli.policy {
                Some(_) => vec![policy(&cli)?],
                None => PolicyKind::ALL.to_vec(),
            };
            let cmp = run_compare(&cfg, &kinds, threads.unwrap_or(cfg.run.threads))?;
            write_comparison(&cmp, &cfg, &out)?;
            print!("{}", cmp.report.to_table());
            println!("outputs: {}", out.display());
        }
    }
    Ok(())
}
