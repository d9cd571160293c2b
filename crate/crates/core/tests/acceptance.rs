//! Acceptance suite: one pass/fail line per criterion, non-zero exit if any
//! criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};

use fogrl::config::ExperimentConfig;
use fogrl::env::{
    compute_reward, discretize, RewardInput, RewardWeights, StateKey, StateVector, Transition,
};
use fogrl::harness::{run_compare, run_training, write_comparison, Agent, Comparison, PolicyKind};
use fogrl::nn::Mlp;
use fogrl::policies::hungarian;
use fogrl::policies::qlearning::q_update;
use fogrl::policies::{
    ActorCriticAgent, ActorCriticConfig, DqnAgent, DqnConfig, EpsilonSchedule, Mode, Policy,
    QLearningConfig, QTable,
};
use fogrl::sim::RngStream;
use fogrl::world::TaskOutcome;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

// ---------------------------------------------------------------- 1

const MDP_STATES: usize = 3;
const MDP_ACTIONS: usize = 2;
/// `(next state, reward)` for every `(state, action)`.
const MDP: [[(usize, f64); MDP_ACTIONS]; MDP_STATES] = [
    [(1, 0.0), (2, 1.0)],
    [(2, 2.0), (0, 0.0)],
    [(0, 0.5), (2, -1.0)],
];

fn value_iteration(discount: f64) -> [[f64; MDP_ACTIONS]; MDP_STATES] {
    let mut q = [[0.0; MDP_ACTIONS]; MDP_STATES];
    loop {
        let mut next = q;
        let mut delta: f64 = 0.0;
        for s in 0..MDP_STATES {
            for a in 0..MDP_ACTIONS {
                let (s2, r) = MDP[s][a];
                let v = q[s2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                next[s][a] = r + discount * v;
                delta = delta.max((next[s][a] - q[s][a]).abs());
            }
        }
        q = next;
        if delta < 1e-13 {
            return q;
        }
    }
}

fn mdp_key(s: usize) -> StateKey {
    StateKey {
        origin: s as u16,
        size: 0,
        deadline: 0,
        loads: [0; 3],
    }
}

fn mdp_transition(s: usize, a: usize) -> Transition {
    let (s2, r) = MDP[s][a];
    Transition {
        state: StateVector(vec![]),
        key: mdp_key(s),
        action: a,
        reward: r,
        next_state: StateVector(vec![]),
        next_key: mdp_key(s2),
        done: false,
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let cfg = QLearningConfig::default();
    let q_star = value_iteration(cfg.discount);
    let mut table = QTable::default();
    let mut rng = RngStream::new(11, "mdp-sampling");
    for _ in 0..50_000 {
        let s = rng.index(MDP_STATES);
        let a = rng.index(MDP_ACTIONS);
        q_update(&mut table, &mdp_transition(s, a), &cfg);
    }
    let mut err: f64 = 0.0;
    for (s, row) in q_star.iter().enumerate() {
        let got = table.values(&mdp_key(s));
        for (a, want) in row.iter().enumerate() {
            err = err.max((got[a] - want).abs());
        }
    }
    // Fixed point: starting from Q*, exact updates leave it in place.
    let mut fixed = QTable::default();
    for (s, row) in q_star.iter().enumerate() {
        fixed.set(mdp_key(s), [row[0], row[1], 0.0, 0.0]);
    }
    let mut drift: f64 = 0.0;
    for _ in 0..100 {
        for s in 0..MDP_STATES {
            for a in 0..MDP_ACTIONS {
                q_update(&mut fixed, &mdp_transition(s, a), &cfg);
                drift = drift.max((fixed.values(&mdp_key(s))[a] - q_star[s][a]).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        err < 1e-2 && drift < 1e-9 && within(elapsed, 10.0),
        format!(
            "max |Q - Q*| = {err:.2e} after 50000 updates (< 1e-2), fixed-point drift {drift:.1e} (< 1e-9), {:.2}s (< 10s)",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let h = 1e-5;
    let mut rng = RngStream::new(21, "gradient-check");
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let nets = 6;
    for n in 0..nets {
        let depth = 2 + rng.index(3);
        let sizes: Vec<usize> = (0..depth).map(|_| 1 + rng.index(32)).collect();
        let mut init = RngStream::new(n as u64, "nn-init");
        let net = Mlp::new(&sizes, &mut init).unwrap();
        let x: Vec<f64> = (0..sizes[0])
            .map(|_| rng.uniform_range(-1.0, 1.0))
            .collect();
        let c: Vec<f64> = (0..net.output_dim())
            .map(|_| rng.uniform_range(-1.0, 1.0))
            .collect();
        let loss = |m: &Mlp| -> f64 {
            m.forward(&x)
                .unwrap()
                .iter()
                .zip(&c)
                .map(|(o, w)| o * w)
                .sum()
        };
        let mut grads = vec![0.0; net.param_count()];
        let trace = net.forward_trace(&x).unwrap();
        net.backward(&trace, &c, &mut grads).unwrap();
        for _ in 0..30 {
            let i = rng.index(net.param_count());
            let mut plus = net.clone();
            plus.params_mut()[i] += h;
            let mut minus = net.clone();
            minus.params_mut()[i] -= h;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let rel = (fd - grads[i]).abs() / fd.abs().max(grads[i].abs()).max(1e-7);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst < 1e-4 && checked >= 100 && within(elapsed, 30.0),
        format!(
            "{checked} parameters over {nets} nets, worst relative error {worst:.2e} (< 1e-4), {:.2}s (< 30s)",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 3

const BANDIT_TRIALS: u64 = 20;

fn bandit_transition(action: usize) -> Transition {
    let key = mdp_key(0);
    Transition {
        state: StateVector(vec![1.0]),
        key,
        action,
        reward: if action == 0 { 1.0 } else { 0.0 },
        next_state: StateVector(vec![1.0]),
        next_key: key,
        done: true,
    }
}

fn criterion_3() -> Verdict {
    let state = StateVector(vec![1.0]);

    let start = Instant::now();
    let steps = 2000;
    let cfg = DqnConfig {
        train_every: 1,
        ..DqnConfig::default()
    };
    let schedule = EpsilonSchedule {
        start: 1.0,
        end: 0.05,
        decay_steps: steps / 2,
    };
    let mut dqn_hits = 0;
    let mut q0_err: f64 = 0.0;
    for trial in 0..BANDIT_TRIALS {
        let mut agent = DqnAgent::with_actions(cfg.clone(), 1, 2, 0.9, schedule, trial).unwrap();
        for _ in 0..steps {
            let a = agent.select(&state).unwrap();
            agent.observe(&bandit_transition(a)).unwrap();
        }
        agent.set_mode(Mode::Evaluation);
        if agent.select(&state).unwrap() == 0 {
            dqn_hits += 1;
        }
        q0_err = q0_err.max((agent.q_values(&state).unwrap()[0] - 1.0).abs());
    }
    let dqn_time = start.elapsed();

    let start = Instant::now();
    let ac_steps = 3000;
    let mut ac_hits = 0;
    let mut min_p0: f64 = 1.0;
    for trial in 0..BANDIT_TRIALS {
        let mut agent =
            ActorCriticAgent::with_actions(ActorCriticConfig::default(), 1, 2, 0.9, trial).unwrap();
        for _ in 0..ac_steps {
            let a = agent.select(&state).unwrap();
            agent.train_step(&bandit_transition(a)).unwrap();
        }
        let (p, _) = agent.evaluate(&state).unwrap();
        min_p0 = min_p0.min(p[0]);
        if p[0] > p[1] {
            ac_hits += 1;
        }
    }
    let ac_time = start.elapsed();

    let n = BANDIT_TRIALS as f64;
    let (dqn_rate, ac_rate) = (dqn_hits as f64 / n, ac_hits as f64 / n);
    verdict(
        dqn_rate > 0.9 && ac_rate > 0.9 && within(dqn_time, 60.0) && within(ac_time, 60.0),
        format!(
            "dqn greedy arm optimal in {dqn_hits}/{BANDIT_TRIALS} trials after {steps} steps (max |Q(a0) - 1| {q0_err:.3}, {:.1}s); \
             actor-critic modal arm optimal in {ac_hits}/{BANDIT_TRIALS} after {ac_steps} steps (min pi(a0) {min_p0:.3}, {:.1}s); need > 0.9 and < 60s each",
            dqn_time.as_secs_f64(),
            ac_time.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 4

fn brute_force(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == cost.len() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                best = best.min(cost[row][c] + go(cost, row + 1, used));
                used[c] = false;
            }
        }
        best
    }
    go(cost, 0, &mut vec![false; cost[0].len()])
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let mut rng = RngStream::new(41, "assignment");
    let mut mismatches = 0;
    let mut invalid = 0;
    for _ in 0..200 {
        let m = 1 + rng.index(6);
        let n = 1 + rng.index(m);
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.uniform_range(0.0, 100.0)).collect())
            .collect();
        let (cols, total) = hungarian::solve(&cost);
        let mut seen = cols.clone();
        seen.sort_unstable();
        seen.dedup();
        let recomputed: f64 = cols.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
        if seen.len() != n || (recomputed - total).abs() > 1e-9 {
            invalid += 1;
        }
        if (total - brute_force(&cost)).abs() > 1e-9 {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        mismatches == 0 && invalid == 0 && within(elapsed, 10.0),
        format!(
            "200 random matrices up to 6x6: {mismatches} optimum mismatches, {invalid} invalid assignments, {:.2}s (< 10s)",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 5-8

fn mean_latency(cmp: &Comparison, p: PolicyKind) -> (f64, f64) {
    let s = cmp
        .report
        .summary(p.name())
        .and_then(|s| s.latency)
        .expect("latency present");
    (s.mean, s.std_error)
}

fn mean_success(cmp: &Comparison, p: PolicyKind) -> (f64, f64) {
    let s = cmp
        .report
        .summary(p.name())
        .and_then(|s| s.success_rate)
        .expect("success present");
    (s.mean, s.std_error)
}

fn criterion_5(cmp: &Comparison, elapsed: Duration) -> Verdict {
    use PolicyKind::*;
    let lat = |p| mean_latency(cmp, p);
    let suc = |p| mean_success(cmp, p);
    let pooled = |a: (f64, f64), b: (f64, f64)| (a.1 * a.1 + b.1 * b.1).sqrt();
    let mut fails = Vec::new();

    if !(lat(Greedy).0 > lat(Optimization).0) {
        fails.push("latency greedy > optimization");
    }
    if !all_learners(|p| lat(Optimization).0 > lat(p).0) {
        fails.push("latency optimization > every RL");
    }
    if !(lat(ActorCritic).0 <= lat(Dqn).0 + pooled(lat(ActorCritic), lat(Dqn))) {
        fails.push("latency actor-critic <= dqn (+SE)");
    }
    if !(lat(Dqn).0 <= lat(QLearning).0 + pooled(lat(Dqn), lat(QLearning))) {
        fails.push("latency dqn <= q-learning (+SE)");
    }
    if !(suc(Greedy).0 < suc(Optimization).0) {
        fails.push("success greedy < optimization");
    }
    if !all_learners(|p| suc(Optimization).0 < suc(p).0) {
        fails.push("success optimization < every RL");
    }
    if !(suc(ActorCritic).0 >= suc(Dqn).0 - pooled(suc(ActorCritic), suc(Dqn))) {
        fails.push("success actor-critic >= dqn (-SE)");
    }
    if !(suc(Dqn).0 >= suc(QLearning).0 - pooled(suc(Dqn), suc(QLearning))) {
        fails.push("success dqn >= q-learning (-SE)");
    }
    if !within(elapsed, 600.0) {
        fails.push("runtime < 10 min");
    }
    let table: Vec<String> = PolicyKind::ALL
        .iter()
        .map(|&p| format!("{p} {:.1}ms/{:.1}%", lat(p).0 * 1e3, suc(p).0 * 100.0))
        .collect();
    let detail = format!(
        "{}; compare took {:.0}s; {}",
        table.join(", "),
        elapsed.as_secs_f64(),
        if fails.is_empty() {
            "all orderings hold".to_owned()
        } else {
            format!("violated: {}", fails.join("; "))
        }
    );
    verdict(fails.is_empty(), detail)
}

fn all_learners(f: impl Fn(PolicyKind) -> bool) -> bool {
    PolicyKind::LEARNERS.into_iter().all(f)
}

fn criterion_6(cmp: &Comparison) -> Verdict {
    let (g_lat, _) = mean_latency(cmp, PolicyKind::Greedy);
    let (g_suc, _) = mean_success(cmp, PolicyKind::Greedy);
    let mut best: Option<(PolicyKind, f64, f64)> = None;
    let mut pass = false;
    for p in PolicyKind::LEARNERS {
        let reduction = 1.0 - mean_latency(cmp, p).0 / g_lat;
        let gain_pp = 100.0 * (mean_success(cmp, p).0 - g_suc);
        if reduction >= 0.20 && gain_pp >= 10.0 {
            pass = true;
        }
        if best.map_or(true, |b| reduction + gain_pp / 100.0 > b.1 + b.2 / 100.0) {
            best = Some((p, reduction, gain_pp));
        }
    }
    let (p, red, gain) = best.expect("three learners");
    let all: Vec<String> = PolicyKind::LEARNERS
        .iter()
        .map(|&p| {
            format!(
                "{p} {:+.1}% latency reduction / {:+.1}pp success",
                100.0 * (1.0 - mean_latency(cmp, p).0 / g_lat),
                100.0 * (mean_success(cmp, p).0 - g_suc)
            )
        })
        .collect();
    verdict(
        pass,
        format!(
            "need >= 20% latency reduction and >= 10pp success gain vs greedy; best {p}: {:.1}% / {gain:.1}pp; {}",
            red * 100.0,
            all.join(", ")
        ),
    )
}

fn criterion_7(cmp: &Comparison) -> Verdict {
    let jain = |p: PolicyKind| cmp.report.summary(p.name()).unwrap().load_balance_jain.mean;
    let g = jain(PolicyKind::Greedy);
    let pass = PolicyKind::LEARNERS.iter().all(|&p| jain(p) >= g);
    let parts: Vec<String> = PolicyKind::ALL
        .iter()
        .map(|&p| {
            let s = cmp.report.summary(p.name()).unwrap();
            format!(
                "{p} {:.3} ({})",
                s.load_balance_jain.mean, s.balance_category
            )
        })
        .collect();
    verdict(pass, format!("mean Jain index: {}", parts.join(", ")))
}

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.run.seeds = vec![7, 8, 9];
    cfg.run.training_episodes = 3;
    cfg.run.episode_s = 10.0;
    cfg.run.eval_s = 30.0;
    cfg
}

fn files_under(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_8(default_cmp: &Comparison) -> Verdict {
    let cfg = small_config();
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    let mut checks = default_cmp.conservation_checks;
    for (label, threads) in [("serial-a", 1), ("serial-b", 1), ("concurrent", 3)] {
        let cmp = run_compare(&cfg, &PolicyKind::ALL, threads).expect("compare runs");
        checks += cmp.conservation_checks;
        let dir = tmp.path().join(label);
        write_comparison(&cmp, &cfg, &dir).unwrap();
        outputs.push((label, files_under(&dir)));
    }
    let reference = &outputs[0].1;
    let identical = outputs.iter().all(|(_, files)| files == reference);
    let csv_identical = outputs.iter().all(|(_, f)| {
        f.iter().find(|(n, _)| n == "metrics.csv")
            == reference.iter().find(|(n, _)| n == "metrics.csv")
    });
    // Each run checks conservation at every sample and aborts on violation,
    // so reaching this point means every sample balanced.
    let min_expected = default_cmp.records.len() * ExperimentConfig::default().run.eval_s as usize;
    verdict(
        identical && csv_identical && default_cmp.conservation_checks >= min_expected,
        format!(
            "{checks} conservation checks passed with none violated; {} output files byte-identical across two serial runs and a 3-thread run: {identical}",
            reference.len()
        ),
    )
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Verdict {
    let outcome = prop_oneof![
        Just(TaskOutcome::Completed),
        Just(TaskOutcome::DeadlineMiss),
        Just(TaskOutcome::Rejected)
    ];
    let strategy = (
        outcome,
        0.0..2.0f64,
        0.05..0.5f64,
        0.0..1.0f64,
        0.0..5.0f64,
        0.0..5.0f64,
        0.0..5.0f64,
        0.0..1.0f64,
    );
    let mut runner = TestRunner::new(PropConfig {
        cases: 1000,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let cap = 2.0;
    let result = runner.run(
        &strategy,
        |(outcome, latency, deadline, balance, a, b, l, extra)| {
            let input = RewardInput {
                outcome,
                latency: Some(latency),
                deadline,
                balance,
            };
            let w = |alpha, beta, lambda_balance| RewardWeights {
                alpha,
                beta,
                lambda_balance,
                gamma_discount: 0.9,
            };
            let r = compute_reward(&input, &w(a, b, l), cap);
            let basis = a * compute_reward(&input, &w(1.0, 0.0, 0.0), cap)
                + b * compute_reward(&input, &w(0.0, 1.0, 0.0), cap)
                + l * compute_reward(&input, &w(0.0, 0.0, 1.0), cap);
            prop_assert!(
                (r - basis).abs() <= 1e-9 * (1.0 + r.abs()),
                "linearity {r} vs {basis}"
            );

            let slower = RewardInput {
                latency: Some(latency + extra),
                ..input
            };
            prop_assert!(
                compute_reward(&slower, &w(a, b, l), cap) <= r + 1e-12,
                "larger delay raised reward"
            );

            let ok = RewardInput {
                outcome: TaskOutcome::Completed,
                ..input
            };
            let miss = RewardInput {
                outcome: TaskOutcome::DeadlineMiss,
                ..input
            };
            prop_assert!(
                compute_reward(&ok, &w(a, b, l), cap) >= compute_reward(&miss, &w(a, b, l), cap)
            );
            Ok(())
        },
    );
    match result {
        Ok(()) => verdict(true, "1000 random outcome tuples: linear in (alpha, beta, lambda), monotone in delay and success"),
        Err(e) => verdict(false, format!("property failed: {e}")),
    }
}

// ---------------------------------------------------------------- 10

fn random_state(rng: &mut RngStream, zones: usize) -> StateVector {
    let dim = StateVector::dim(zones);
    let mut v: Vec<f64> = (0..dim - zones).map(|_| rng.uniform()).collect();
    let origin = rng.index(zones);
    v.extend((0..zones).map(|z| if z == origin { 1.0 } else { 0.0 }));
    StateVector(v)
}

fn criterion_10() -> Verdict {
    let mut cfg = ExperimentConfig::default();
    cfg.run.training_episodes = 3;
    let zones = cfg.world.topology.zones;
    let tmp = tempfile::tempdir().unwrap();
    let mut rng = RngStream::new(101, "round-trip-states");
    let states: Vec<StateVector> = (0..1000).map(|_| random_state(&mut rng, zones)).collect();
    let mut parts = Vec::new();
    let mut pass = true;
    for kind in PolicyKind::LEARNERS {
        let mut trained = run_training(&cfg, kind, 5).unwrap().agent;
        let path = tmp.path().join(format!("{kind}.artifact"));
        trained.save(&path).unwrap();
        let before = std::fs::read(&path).unwrap();
        let mut loaded = Agent::load(kind, &path, &cfg).unwrap();
        let mut mismatches = 0;
        let mut distinct = std::collections::BTreeSet::new();
        let decide = |a: &mut Agent, s: &StateVector| -> usize {
            match a {
                Agent::QLearning(q) => q.select(&discretize(s)).index(),
                Agent::Dqn(d) => d.select(s).unwrap(),
                Agent::ActorCritic(c) => c.select(s).unwrap(),
                _ => unreachable!(),
            }
        };
        let mut keys: Vec<StateVector> = states.clone();
        if let Agent::QLearning(q) = &trained {
            // Also cover every state the table actually learned.
            for (k, _) in q.table.iter() {
                let mut s = random_state(&mut rng, zones);
                let origin_at = StateVector::dim(zones) - zones;
                for z in 0..zones {
                    s.0[origin_at + z] = if z == k.origin as usize { 1.0 } else { 0.0 };
                }
                keys.push(s);
            }
            let Agent::QLearning(l) = &loaded else {
                unreachable!()
            };
            for (k, e) in q.table.iter() {
                if l.table.entry(k).map(|x| x.q.map(f64::to_bits)) != Some(e.q.map(f64::to_bits)) {
                    mismatches += 1;
                }
            }
        }
        for s in &keys {
            let a = decide(&mut trained, s);
            let b = decide(&mut loaded, s);
            distinct.insert(a);
            if a != b {
                mismatches += 1;
            }
        }
        let untouched = std::fs::read(&path).unwrap() == before;
        pass &= mismatches == 0 && untouched && trained.policy_mut().mode() == Mode::Evaluation;
        parts.push(format!(
            "{kind}: {} states, {mismatches} mismatches, {} distinct actions",
            keys.len(),
            distinct.len()
        ));
    }
    verdict(
        pass,
        format!(
            "{} (greedy and optimization carry no learned state)",
            parts.join("; ")
        ),
    )
}

fn report(n: u32, name: &str, v: &Verdict, failed: &mut Vec<u32>) {
    let tag = if v.pass { "PASS" } else { "FAIL" };
    println!("criterion {n:>2} [{tag}] {name}: {}", v.detail);
    if !v.pass {
        failed.push(n);
    }
}

fn main() {
    // `cargo test -- --list` and filters pass arguments; run only when unfiltered.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut failed = Vec::new();
    report(1, "tabular oracle", &criterion_1(), &mut failed);
    report(2, "gradient check", &criterion_2(), &mut failed);
    report(3, "bandit sanity", &criterion_3(), &mut failed);
    report(4, "assignment exactness", &criterion_4(), &mut failed);

    let cfg = ExperimentConfig::default();
    let start = Instant::now();
    let cmp =
        run_compare(&cfg, &PolicyKind::ALL, cfg.run.threads).expect("default comparison runs");
    let elapsed = start.elapsed();
    report(
        5,
        "policy ordering",
        &criterion_5(&cmp, elapsed),
        &mut failed,
    );
    report(6, "relative improvement", &criterion_6(&cmp), &mut failed);
    report(7, "load balance", &criterion_7(&cmp), &mut failed);
    report(
        8,
        "conservation and determinism",
        &criterion_8(&cmp),
        &mut failed,
    );
    report(9, "reward algebra", &criterion_9(), &mut failed);
    report(10, "persistence round-trip", &criterion_10(), &mut failed);

    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!(
            "acceptance: {} of 10 criteria failed: {failed:?}",
            failed.len()
        );
        std::process::exit(1);
    }
}
