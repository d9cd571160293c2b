//! Seeded pipelines: train a learner, evaluate any policy, and compare all
//! five across seeds with CSV, JSON and plot-data outputs.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::env::StateVector;
use crate::episode::{run_episode, EpisodeResult, EpisodePlan};
use crate::error::{Error, Result};
use crate::metrics::{balance_category, export_csv, export_json, MetricsRecord};
use crate::policies::{
    ActorCriticAgent, DqnAgent, Greedy, Mode, OptimizationPolicy, Policy, QLearningAgent,
};
use crate::sim::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Greedy,
    Optimization,
    QLearning,
    Dqn,
    ActorCritic,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Greedy,
        PolicyKind::Optimization,
        PolicyKind::QLearning,
        PolicyKind::Dqn,
        PolicyKind::ActorCritic,
    ];
    pub const LEARNERS: [PolicyKind; 3] = [
        PolicyKind::QLearning,
        PolicyKind::Dqn,
        PolicyKind::ActorCritic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Greedy => "greedy",
            PolicyKind::Optimization => "optimization",
            PolicyKind::QLearning => "q-learning",
            PolicyKind::Dqn => "dqn",
            PolicyKind::ActorCritic => "actor-critic",
        }
    }

    pub fn is_learner(self) -> bool {
        Self::LEARNERS.contains(&self)
    }

    /// File name extension of the saved artifact.
    pub fn artifact_extension(self) -> Option<&'static str> {
        match self {
            PolicyKind::QLearning => Some("csv"),
            PolicyKind::Dqn | PolicyKind::ActorCritic => Some("mlp"),
            _ => None,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownPolicy(s.to_owned()))
    }
}

pub fn topology_seed(seed: u64) -> u64 {
    derive_seed(seed, "topology", 0)
}

pub fn eval_run_seed(seed: u64) -> u64 {
    derive_seed(seed, "eval", 0)
}

pub fn training_run_seed(seed: u64, episode: u64) -> u64 {
    derive_seed(seed, "train-episode", episode)
}

pub fn agent_seed(seed: u64, kind: PolicyKind) -> u64 {
    derive_seed(seed, kind.name(), 0)
}

/// Any of the five policies, owned.
#[derive(Debug, Clone)]
pub enum Agent {
    Greedy(Greedy),
    Optimization(OptimizationPolicy),
    QLearning(QLearningAgent),
    Dqn(Box<DqnAgent>),
    ActorCritic(Box<ActorCriticAgent>),
}

impl Agent {
    /// A fresh, untrained instance.
    pub fn new(kind: PolicyKind, cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        let p = &cfg.policies;
        let dim = StateVector::dim(cfg.world.topology.zones);
        let gamma = cfg.env.reward.gamma_discount;
        let schedule = p.exploration.schedule(cfg.expected_training_decisions());
        let s = agent_seed(seed, kind);
        Ok(match kind {
            PolicyKind::Greedy => Agent::Greedy(Greedy),
            PolicyKind::Optimization => {
                Agent::Optimization(OptimizationPolicy::new(p.optimization.clone()))
            }
            PolicyKind::QLearning => {
                Agent::QLearning(QLearningAgent::new(p.q_learning, schedule, s))
            }
            PolicyKind::Dqn => Agent::Dqn(Box::new(DqnAgent::new(
                p.dqn.clone(),
                dim,
                gamma,
                schedule,
                s,
            )?)),
            PolicyKind::ActorCritic => Agent::ActorCritic(Box::new(ActorCriticAgent::new(
                p.actor_critic.clone(),
                dim,
                gamma,
                s,
            )?)),
        })
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            Agent::Greedy(_) => PolicyKind::Greedy,
            Agent::Optimization(_) => PolicyKind::Optimization,
            Agent::QLearning(_) => PolicyKind::QLearning,
            Agent::Dqn(_) => PolicyKind::Dqn,
            Agent::ActorCritic(_) => PolicyKind::ActorCritic,
        }
    }

    pub fn policy_mut(&mut self) -> &mut dyn Policy {
        match self {
            Agent::Greedy(p) => p,
            Agent::Optimization(p) => p,
            Agent::QLearning(p) => p,
            Agent::Dqn(p) => p.as_mut(),
            Agent::ActorCritic(p) => p.as_mut(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        match self {
            Agent::QLearning(a) => a.save(path),
            Agent::Dqn(a) => a.save(path),
            Agent::ActorCritic(a) => a.save(path),
            other => Err(Error::NotTrainable(other.kind().name().to_owned())),
        }
    }

    /// Restores a saved learner in evaluation mode.
    pub fn load(kind: PolicyKind, path: &Path, cfg: &ExperimentConfig) -> Result<Self> {
        let p = &cfg.policies;
        let dim = StateVector::dim(cfg.world.topology.zones);
        let gamma = cfg.env.reward.gamma_discount;
        Ok(match kind {
            PolicyKind::QLearning => Agent::QLearning(QLearningAgent::load(path, p.q_learning)?),
            PolicyKind::Dqn => {
                Agent::Dqn(Box::new(DqnAgent::load(path, p.dqn.clone(), dim, gamma)?))
            }
            PolicyKind::ActorCritic => Agent::ActorCritic(Box::new(ActorCriticAgent::load(
                path,
                p.actor_critic.clone(),
                dim,
                gamma,
            )?)),
            other => return Err(Error::NotTrainable(other.name().to_owned())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStat {
    pub episode: u64,
    pub decisions: usize,
    pub reward_sum: f64,
    pub mean_reward: f64,
    pub success_rate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub agent: Agent,
    pub curve: Vec<EpisodeStat>,
}

/// Trains a learner for `run.training_episodes` fresh episodes. Each episode
/// reuses the seed's topology with its own run seed.
pub fn run_training(cfg: &ExperimentConfig, kind: PolicyKind, seed: u64) -> Result<Trained> {
    if !kind.is_learner() {
        return Err(Error::NotTrainable(kind.name().to_owned()));
    }
    let mut agent = Agent::new(kind, cfg, seed)?;
    let mut curve = Vec::with_capacity(cfg.run.training_episodes as usize);
    for episode in 0..cfg.run.training_episodes {
        let policy = agent.policy_mut();
        policy.set_mode(Mode::Training);
        let plan = EpisodePlan {
            horizon: cfg.run.episode_s,
            topology_seed: topology_seed(seed),
            run_seed: training_run_seed(seed, episode),
            record_seed: seed,
        };
        let r = run_episode(&cfg.world, &cfg.env, policy, plan)?;
        curve.push(EpisodeStat {
            episode,
            decisions: r.decisions,
            reward_sum: r.reward_sum,
            mean_reward: r.mean_reward(),
            success_rate: r.record.success_rate,
        });
    }
    agent.policy_mut().set_mode(Mode::Evaluation);
    Ok(Trained { agent, curve })
}

/// One evaluation run of `run.eval_s` seconds with learning disabled.
pub fn run_eval(cfg: &ExperimentConfig, agent: &mut Agent, seed: u64) -> Result<EpisodeResult> {
    let policy = agent.policy_mut();
    policy.set_mode(Mode::Evaluation);
    let plan = EpisodePlan {
        horizon: cfg.run.eval_s,
        topology_seed: topology_seed(seed),
        run_seed: eval_run_seed(seed),
        record_seed: seed,
    };
    run_episode(&cfg.world, &cfg.env, policy, plan)
}

pub fn write_curve_csv(curve: &[EpisodeStat], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record([
        "episode",
        "decisions",
        "reward_sum",
        "mean_reward",
        "success_rate",
    ])?;
    for s in curve {
        w.write_record([
            s.episode.to_string(),
            s.decisions.to_string(),
            format!("{:?}", s.reward_sum),
            format!("{:?}", s.mean_reward),
            s.success_rate.map(|v| format!("{v:?}")).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Mean of `xs` with sample standard deviation and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            std,
            std_error: std / (n as f64).sqrt(),
            n,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    pub runs: usize,
    /// Seconds.
    pub latency: Option<Stat>,
    pub success_rate: Option<Stat>,
    pub load_balance_jain: Stat,
    pub load_variance: Stat,
    pub mean_utilization: Stat,
    pub balance_category: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub policy: String,
    /// `1 - latency / greedy latency`.
    pub latency_reduction: Option<f64>,
    /// Success-rate difference in percentage points.
    pub success_gain_pp: Option<f64>,
    pub jain_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub seeds: Vec<u64>,
    pub policies: Vec<PolicySummary>,
    /// Policies by ascending mean latency.
    pub latency_ranking: Vec<String>,
    /// Policies by descending mean success rate.
    pub success_ranking: Vec<String>,
    pub improvement_vs_greedy: Vec<Improvement>,
}

impl ComparisonReport {
    /// Aggregates exported records; policies keep their first-seen order.
    pub fn from_records(records: &[MetricsRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Invalid("no records to aggregate".into()));
        }
        let mut order: Vec<&str> = Vec::new();
        let mut seeds: Vec<u64> = Vec::new();
        for r in records {
            if !order.contains(&r.policy.as_str()) {
                order.push(&r.policy);
            }
            if !seeds.contains(&r.seed) {
                seeds.push(r.seed);
            }
        }
        let policies: Vec<PolicySummary> = order
            .iter()
            .map(|name| {
                let rs: Vec<&MetricsRecord> =
                    records.iter().filter(|r| r.policy == *name).collect();
                let col = |f: &dyn Fn(&MetricsRecord) -> f64| {
                    Stat::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>())
                };
                let opt = |f: &dyn Fn(&MetricsRecord) -> Option<f64>| {
                    Stat::of(&rs.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
                };
                let jain = col(&|r| r.load_balance_jain).expect("non-empty group");
                PolicySummary {
                    policy: (*name).to_owned(),
                    runs: rs.len(),
                    latency: opt(&|r| r.avg_latency),
                    success_rate: opt(&|r| r.success_rate),
                    load_balance_jain: jain,
                    load_variance: col(&|r| r.load_variance).expect("non-empty group"),
                    mean_utilization: col(&|r| r.mean_utilization).expect("non-empty group"),
                    balance_category: balance_category(jain.mean).to_owned(),
                }
            })
            .collect();

        let rank = |key: &dyn Fn(&PolicySummary) -> Option<f64>, ascending: bool| {
            let mut v: Vec<(&str, f64)> = policies
                .iter()
                .filter_map(|p| key(p).map(|m| (p.policy.as_str(), m)))
                .collect();
            v.sort_by(|a, b| {
                if ascending {
                    a.1.total_cmp(&b.1)
                } else {
                    b.1.total_cmp(&a.1)
                }
            });
            v.into_iter().map(|(n, _)| n.to_owned()).collect::<Vec<_>>()
        };
        let latency_ranking = rank(&|p| p.latency.map(|s| s.mean), true);
        let success_ranking = rank(&|p| p.success_rate.map(|s| s.mean), false);

        let greedy = policies
            .iter()
            .find(|p| p.policy == PolicyKind::Greedy.name());
        let improvement_vs_greedy = match greedy {
            None => Vec::new(),
            Some(g) => policies
                .iter()
                .filter(|p| p.policy != g.policy)
                .map(|p| Improvement {
                    policy: p.policy.clone(),
                    latency_reduction: match (p.latency, g.latency) {
                        (Some(a), Some(b)) if b.mean > 0.0 => Some(1.0 - a.mean / b.mean),
                        _ => None,
                    },
                    success_gain_pp: match (p.success_rate, g.success_rate) {
                        (Some(a), Some(b)) => Some(100.0 * (a.mean - b.mean)),
                        _ => None,
                    },
                    jain_gain: p.load_balance_jain.mean - g.load_balance_jain.mean,
                })
                .collect(),
        };
        Ok(Self {
            seeds,
            policies,
            latency_ranking,
            success_ranking,
            improvement_vs_greedy,
        })
    }

    pub fn summary(&self, policy: &str) -> Option<&PolicySummary> {
        self.policies.iter().find(|p| p.policy == policy)
    }

    /// Fixed-width table for terminals.
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<14}{:>14}{:>14}{:>10}{:>12}  {}\n",
            "policy", "latency_ms", "success_%", "jain", "util_%", "balance"
        );
        for p in &self.policies {
            let lat = p.latency.map_or("-".into(), |l| {
                format!("{:.1}±{:.1}", l.mean * 1e3, l.std * 1e3)
            });
            let suc = p.success_rate.map_or("-".into(), |l| {
                format!("{:.1}±{:.1}", l.mean * 100.0, l.std * 100.0)
            });
            s.push_str(&format!(
                "{:<14}{:>14}{:>14}{:>10.3}{:>12.1}  {}\n",
                p.policy,
                lat,
                suc,
                p.load_balance_jain.mean,
                p.mean_utilization.mean * 100.0,
                p.balance_category
            ));
        }
        s
    }
}

/// Everything a comparison produced, in `(seed, policy)` order.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub records: Vec<MetricsRecord>,
    pub report: ComparisonReport,
    pub curves: Vec<(PolicyKind, u64, Vec<EpisodeStat>)>,
    pub agents: Vec<(u64, Agent)>,
    /// Conservation checks passed across all evaluation runs.
    pub conservation_checks: usize,
}

struct SubRun {
    record: MetricsRecord,
    curve: Option<Vec<EpisodeStat>>,
    agent: Agent,
    checks: usize,
}

fn sub_run(cfg: &ExperimentConfig, kind: PolicyKind, seed: u64) -> Result<SubRun> {
    let (mut agent, curve) = if kind.is_learner() {
        let t = run_training(cfg, kind, seed)?;
        (t.agent, Some(t.curve))
    } else {
        (Agent::new(kind, cfg, seed)?, None)
    };
    let r = run_eval(cfg, &mut agent, seed)?;
    Ok(SubRun {
        record: r.record,
        curve,
        agent,
        checks: r.conservation_checks,
    })
}

/// Trains and evaluates every policy on every configured seed.
///
/// Sub-runs share nothing, so `threads` changes wall time only.
pub fn run_compare(
    cfg: &ExperimentConfig,
    kinds: &[PolicyKind],
    threads: usize,
) -> Result<Comparison> {
    if cfg.run.seeds.len() < 3 {
        return Err(Error::config("run.seeds", "compare needs at least 3 seeds"));
    }
    let jobs: Vec<(u64, PolicyKind)> = cfg
        .run
        .seeds
        .iter()
        .flat_map(|&s| kinds.iter().map(move |&k| (s, k)))
        .collect();
    let slots: Vec<Mutex<Option<Result<SubRun>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1).min(jobs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(seed, kind)) = jobs.get(i) else {
                    break;
                };
                let out = sub_run(cfg, kind, seed)
                    .map_err(|e| Error::Invalid(format!("sub-run {kind} seed {seed} failed: {e}")));
                *slots[i].lock().expect("slot lock") = Some(out);
            });
        }
    });
    let mut records = Vec::with_capacity(jobs.len());
    let mut curves = Vec::new();
    let mut agents = Vec::new();
    let mut checks = 0;
    for ((seed, kind), slot) in jobs.into_iter().zip(slots) {
        let run = slot
            .into_inner()
            .expect("slot lock")
            .expect("every job ran")?;
        records.push(run.record);
        if let Some(c) = run.curve {
            curves.push((kind, seed, c));
        }
        agents.push((seed, run.agent));
        checks += run.checks;
    }
    let report = ComparisonReport::from_records(&records)?;
    Ok(Comparison {
        records,
        report,
        curves,
        agents,
        conservation_checks: checks,
    })
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Writes the effective config next to the other outputs.
pub fn write_config_echo(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PathBuf> {
    create_dir(out_dir)?;
    let path = out_dir.join("config.effective.json");
    write_text(&path, &(cfg.to_json() + "\n"))?;
    Ok(path)
}

pub fn artifact_path(dir: &Path, kind: PolicyKind, seed: u64) -> Option<PathBuf> {
    kind.artifact_extension()
        .map(|ext| dir.join(format!("{}-seed{seed}.{ext}", kind.name())))
}

/// Writes one plot-data file: policy, mean and standard deviation per policy.
fn write_plot(
    path: &Path,
    report: &ComparisonReport,
    column: &str,
    pick: impl Fn(&PolicySummary) -> Option<(f64, f64)>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record([
        "policy",
        &format!("mean_{column}"),
        &format!("std_{column}"),
        "runs",
    ])?;
    for p in &report.policies {
        let (m, s) = pick(p).map_or((String::new(), String::new()), |(m, s)| {
            (format!("{m:?}"), format!("{s:?}"))
        });
        w.write_record([p.policy.clone(), m, s, p.runs.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Writes metrics, report, plot data, curves, artifacts and the config echo.
pub fn write_comparison(cmp: &Comparison, cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    write_config_echo(cfg, out_dir)?;
    export_csv(&cmp.records, &out_dir.join("metrics.csv"))?;
    export_json(&cmp.records, &out_dir.join("metrics.json"))?;
    let report = serde_json::to_string_pretty(&cmp.report)?;
    write_text(&out_dir.join("report.json"), &(report + "\n"))?;
    write_plot(
        &out_dir.join("plot_latency.csv"),
        &cmp.report,
        "latency_ms",
        |p| p.latency.map(|s| (s.mean * 1e3, s.std * 1e3)),
    )?;
    write_plot(
        &out_dir.join("plot_success.csv"),
        &cmp.report,
        "success_pct",
        |p| p.success_rate.map(|s| (s.mean * 100.0, s.std * 100.0)),
    )?;
    let curves = out_dir.join("curves");
    create_dir(&curves)?;
    for (kind, seed, curve) in &cmp.curves {
        write_curve_csv(curve, &curves.join(format!("{kind}-seed{seed}.csv")))?;
    }
    let artifacts = out_dir.join("artifacts");
    create_dir(&artifacts)?;
    for (seed, agent) in &cmp.agents {
        if let Some(path) = artifact_path(&artifacts, agent.kind(), *seed) {
            agent.save(&path)?;
        }
    }
    Ok(())
}
