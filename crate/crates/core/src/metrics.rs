//! Run metrics: average latency, success rate, load balance and utilization.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{Counts, Task, TaskOutcome, World};

/// Jain's fairness index `(Σx)² / (n·Σx²)`, 1.0 for an all-zero vector.
pub fn jain_index(loads: &[f64]) -> f64 {
    assert!(!loads.is_empty(), "jain_index of empty slice");
    let sum: f64 = loads.iter().sum();
    let sq: f64 = loads.iter().map(|x| x * x).sum();
    if sq == 0.0 {
        1.0
    } else {
        (sum * sum / (loads.len() as f64 * sq)).clamp(0.0, 1.0)
    }
}

/// Population variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Busy time divided by elapsed time, clipped to `[0, 1]`.
pub fn utilization(busy_time: f64, elapsed: f64) -> f64 {
    assert!(elapsed > 0.0);
    (busy_time / elapsed).clamp(0.0, 1.0)
}

/// Jain index and variance of per-node busy shares over the world's window.
pub fn sampled_balance(world: &World, now: f64) -> (f64, f64) {
    let shares = world.busy_shares(now);
    (jain_index(&shares), variance(&shares))
}

/// Human-readable bucket for a Jain index.
pub fn balance_category(jain: f64) -> &'static str {
    if jain < 0.5 {
        "Low"
    } else if jain < 0.7 {
        "Moderate"
    } else if jain <= 0.9 {
        "High"
    } else {
        "Very High"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub policy: String,
    pub seed: u64,
    pub generated: usize,
    pub completed: usize,
    pub missed: usize,
    pub rejected: usize,
    pub in_flight: usize,
    /// Seconds, over completed tasks only.
    pub avg_latency: Option<f64>,
    pub success_rate: Option<f64>,
    pub load_balance_jain: f64,
    pub load_variance: f64,
    pub mean_utilization: f64,
    pub node_utilization: Vec<f64>,
}

/// Running aggregation for one run.
#[derive(Debug, Clone, Default)]
pub struct MetricsCollector {
    recorded: Vec<bool>,
    counts: Counts,
    latency_sum: f64,
    jain_sum: f64,
    variance_sum: f64,
    samples: usize,
}

impl MetricsCollector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self) -> Counts {
        self.counts
    }

    pub fn note_generated(&mut self) {
        self.counts.generated += 1;
    }

    /// Folds a terminal task into the running sums.
    pub fn record_outcome(&mut self, task: &Task) -> Result<()> {
        if task.id >= self.recorded.len() {
            self.recorded.resize(task.id + 1, false);
        }
        if self.recorded[task.id] {
            return Err(Error::DuplicateRecord(task.id));
        }
        match task.outcome {
            TaskOutcome::Pending => {
                return Err(Error::Invalid(format!("task {} is not terminal", task.id)));
            }
            TaskOutcome::Completed => {
                self.counts.completed += 1;
                self.latency_sum += task
                    .latency()
                    .ok_or_else(|| Error::Invalid(format!("task {} has no latency", task.id)))?;
            }
            TaskOutcome::DeadlineMiss => self.counts.missed += 1,
            TaskOutcome::Rejected => self.counts.rejected += 1,
        }
        self.recorded[task.id] = true;
        Ok(())
    }

    pub fn avg_latency(&self) -> Option<f64> {
        (self.counts.completed > 0).then(|| self.latency_sum / self.counts.completed as f64)
    }

    pub fn success_rate(&self) -> Option<f64> {
        (self.counts.generated > 0)
            .then(|| self.counts.completed as f64 / self.counts.generated as f64)
    }

    pub fn add_balance_sample(&mut self, jain: f64, var: f64) {
        self.jain_sum += jain;
        self.variance_sum += var;
        self.samples += 1;
    }

    pub fn sample(&mut self, world: &World, now: f64) {
        let (j, v) = sampled_balance(world, now);
        self.add_balance_sample(j, v);
    }

    pub fn finish(&self, world: &World, elapsed: f64, policy: &str, seed: u64) -> MetricsRecord {
        let node_utilization: Vec<f64> = world
            .nodes
            .iter()
            .map(|n| utilization(n.cumulative_busy_time(elapsed), elapsed))
            .collect();
        let mean_utilization =
            node_utilization.iter().sum::<f64>() / node_utilization.len().max(1) as f64;
        let (jain, var) = if self.samples > 0 {
            (
                self.jain_sum / self.samples as f64,
                self.variance_sum / self.samples as f64,
            )
        } else {
            (1.0, 0.0)
        };
        MetricsRecord {
            policy: policy.to_owned(),
            seed,
            generated: self.counts.generated,
            completed: self.counts.completed,
            missed: self.counts.missed,
            rejected: self.counts.rejected,
            in_flight: self.counts.in_flight(),
            avg_latency: self.avg_latency(),
            success_rate: self.success_rate(),
            load_balance_jain: jain,
            load_variance: var,
            mean_utilization,
            node_utilization,
        }
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "policy",
    "seed",
    "generated",
    "completed",
    "missed",
    "rejected",
    "in_flight",
    "avg_latency_s",
    "success_rate",
    "load_balance_jain",
    "load_variance",
    "mean_utilization",
    "node_utilization",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_row(r: &MetricsRecord) -> Vec<String> {
    vec![
        r.policy.clone(),
        r.seed.to_string(),
        r.generated.to_string(),
        r.completed.to_string(),
        r.missed.to_string(),
        r.rejected.to_string(),
        r.in_flight.to_string(),
        opt(r.avg_latency),
        opt(r.success_rate),
        r.load_balance_jain.to_string(),
        r.load_variance.to_string(),
        r.mean_utilization.to_string(),
        r.node_utilization
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(";"),
    ]
}

/// Writes records as CSV. Floats use shortest round-trip formatting.
pub fn write_csv<W: Write>(records: &[MetricsRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(csv_row(r))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn export_csv(records: &[MetricsRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Invalid("no records to export".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(records, BufWriter::new(file))
}

fn parse<T: std::str::FromStr>(field: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Invalid(format!("bad value `{s}` in column `{field}`")))
}

fn parse_opt(field: &str, s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse(field, s).map(Some)
    }
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<MetricsRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::Invalid(format!("unexpected CSV header {header:?}")));
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let f = |i: usize| row.get(i).unwrap_or("");
        out.push(MetricsRecord {
            policy: f(0).to_owned(),
            seed: parse(CSV_HEADER[1], f(1))?,
            generated: parse(CSV_HEADER[2], f(2))?,
            completed: parse(CSV_HEADER[3], f(3))?,
            missed: parse(CSV_HEADER[4], f(4))?,
            rejected: parse(CSV_HEADER[5], f(5))?,
            in_flight: parse(CSV_HEADER[6], f(6))?,
            avg_latency: parse_opt(CSV_HEADER[7], f(7))?,
            success_rate: parse_opt(CSV_HEADER[8], f(8))?,
            load_balance_jain: parse(CSV_HEADER[9], f(9))?,
            load_variance: parse(CSV_HEADER[10], f(10))?,
            mean_utilization: parse(CSV_HEADER[11], f(11))?,
            node_utilization: if f(12).is_empty() {
                Vec::new()
            } else {
                f(12)
                    .split(';')
                    .map(|s| parse(CSV_HEADER[12], s))
                    .collect::<Result<_>>()?
            },
        });
    }
    Ok(out)
}

pub fn export_json(records: &[MetricsRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, records)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}
