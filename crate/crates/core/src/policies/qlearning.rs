//! Tabular Q-learning over [`StateKey`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{argmax, epsilon_greedy_select, DecisionContext, EpsilonSchedule, Mode, Policy};
use crate::env::{StateKey, Transition};
use crate::error::{Error, Result};
use crate::sim::RngStream;
use crate::world::Action;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QLearningConfig {
    /// Base learning rate `eta`.
    pub learning_rate: f64,
    /// Discount `delta` in the TD target.
    pub discount: f64,
    /// The rate at a state after `k` visits is `eta / (1 + k / visit_decay)`.
    pub visit_decay: f64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            discount: 0.9,
            visit_decay: 1000.0,
        }
    }
}

impl QLearningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::config(
                "policies.q_learning.learning_rate",
                "must lie in (0, 1]",
            ));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::config(
                "policies.q_learning.discount",
                "must lie in (0, 1)",
            ));
        }
        if !(self.visit_decay > 0.0) {
            return Err(Error::config(
                "policies.q_learning.visit_decay",
                "must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QEntry {
    pub q: [f64; Action::COUNT],
    pub visits: u64,
}

impl Default for QEntry {
    fn default() -> Self {
        Self {
            q: [0.0; Action::COUNT],
            visits: 0,
        }
    }
}

/// Sparse Q-table; unvisited keys read as all zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QTable {
    entries: BTreeMap<StateKey, QEntry>,
}

const HEADER: [&str; 11] = [
    "origin",
    "size",
    "deadline",
    "load_local",
    "load_left",
    "load_right",
    "visits",
    "q_local",
    "q_left",
    "q_right",
    "q_cloud",
];

impl QTable {
    pub fn values(&self, key: &StateKey) -> [f64; Action::COUNT] {
        self.entries.get(key).map_or([0.0; Action::COUNT], |e| e.q)
    }

    pub fn entry(&self, key: &StateKey) -> Option<&QEntry> {
        self.entries.get(key)
    }

    pub fn set(&mut self, key: StateKey, q: [f64; Action::COUNT]) {
        self.entries.entry(key).or_default().q = q;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateKey, &QEntry)> {
        self.entries.iter()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(HEADER)?;
        for (k, e) in &self.entries {
            let mut row: Vec<String> = k.components().iter().map(|c| c.to_string()).collect();
            row.push(e.visits.to_string());
            row.extend(e.q.iter().map(|q| format!("{q:?}")));
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| Error::Artifact(e.to_string()))?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.iter().ne(HEADER) {
            return Err(Error::Artifact(format!(
                "unexpected q-table header {header:?}"
            )));
        }
        let mut table = QTable::default();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad =
                |col: usize| Error::Artifact(format!("row {}: bad `{}`", line + 1, HEADER[col]));
            let int = |col: usize| -> Result<u64> { rec[col].parse().map_err(|_| bad(col)) };
            let small = |col: usize, max: u64| -> Result<u8> {
                int(col).and_then(|v| if v < max { Ok(v as u8) } else { Err(bad(col)) })
            };
            let key = StateKey {
                origin: u16::try_from(int(0)?).map_err(|_| bad(0))?,
                size: small(1, 3)?,
                deadline: small(2, 3)?,
                loads: [small(3, 4)?, small(4, 4)?, small(5, 4)?],
            };
            let mut q = [0.0; Action::COUNT];
            for (a, v) in q.iter_mut().enumerate() {
                *v = rec[7 + a]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(7 + a))?;
            }
            let entry = QEntry { q, visits: int(6)? };
            if table.entries.insert(key, entry).is_some() {
                return Err(Error::Artifact(format!(
                    "row {}: duplicate state",
                    line + 1
                )));
            }
        }
        Ok(table)
    }
}

/// One TD update on `t`; returns the TD error before the step.
pub fn q_update(table: &mut QTable, t: &Transition, cfg: &QLearningConfig) -> f64 {
    let bootstrap = if t.done {
        0.0
    } else {
        let next = table.values(&t.next_key);
        next[argmax(&next)]
    };
    let entry = table.entries.entry(t.key).or_default();
    let eta = cfg.learning_rate / (1.0 + entry.visits as f64 / cfg.visit_decay);
    let td = t.reward + cfg.discount * bootstrap - entry.q[t.action];
    entry.q[t.action] += eta * td;
    entry.visits += 1;
    td
}

#[derive(Debug, Clone)]
pub struct QLearningAgent {
    pub config: QLearningConfig,
    pub table: QTable,
    schedule: EpsilonSchedule,
    rng: RngStream,
    mode: Mode,
    steps: u64,
}

impl QLearningAgent {
    pub fn new(config: QLearningConfig, schedule: EpsilonSchedule, seed: u64) -> Self {
        Self {
            config,
            table: QTable::default(),
            schedule,
            rng: RngStream::new(seed, "q-learning-explore"),
            mode: Mode::Training,
            steps: 0,
        }
    }

    pub fn with_table(config: QLearningConfig, table: QTable) -> Self {
        let mut agent = Self::new(config, EpsilonSchedule::default(), 0);
        agent.table = table;
        agent.mode = Mode::Evaluation;
        agent
    }

    /// Training decisions taken so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn select(&mut self, key: &StateKey) -> Action {
        let values = self.table.values(key);
        let i = match self.mode {
            Mode::Evaluation => argmax(&values),
            Mode::Training => {
                let eps = self.schedule.value(self.steps);
                self.steps += 1;
                epsilon_greedy_select(&values, eps, &mut self.rng)
            }
        };
        Action::ALL[i]
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.table.write_csv(f)
    }

    pub fn load(path: &Path, config: QLearningConfig) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::with_table(config, QTable::read_csv(f)?))
    }
}

impl Policy for QLearningAgent {
    fn name(&self) -> &'static str {
        "q-learning"
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Action {
        self.select(ctx.key)
    }

    fn learn(&mut self, transition: &Transition) -> Result<()> {
        if self.mode == Mode::Training {
            q_update(&mut self.table, transition, &self.config);
        }
        Ok(())
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    fn is_learner(&self) -> bool {
        true
    }
}
