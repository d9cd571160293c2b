//! Experiment configuration: one strict JSON document holding every science
//! parameter. Omitted fields take their defaults, unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::policies::{
    ActorCriticConfig, DqnConfig, EpsilonSchedule, OptimizationConfig, QLearningConfig,
};
use crate::world::WorldConfig;

/// Linear epsilon decay shared by the value-based learners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplorationConfig {
    pub start: f64,
    pub end: f64,
    /// Fraction of the expected training decisions spent decaying.
    pub decay_fraction: f64,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            decay_fraction: 0.5,
        }
    }
}

impl ExplorationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("start", self.start),
            ("end", self.end),
            ("decay_fraction", self.decay_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(
                    format!("policies.exploration.{name}"),
                    "must lie in [0, 1]",
                ));
            }
        }
        Ok(())
    }

    pub fn schedule(&self, expected_decisions: f64) -> EpsilonSchedule {
        EpsilonSchedule {
            start: self.start,
            end: self.end,
            decay_steps: (expected_decisions * self.decay_fraction).round() as u64,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfigs {
    pub exploration: ExplorationConfig,
    pub optimization: OptimizationConfig,
    pub q_learning: QLearningConfig,
    pub dqn: DqnConfig,
    pub actor_critic: ActorCriticConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub training_episodes: u64,
    /// Simulated seconds per training episode.
    pub episode_s: f64,
    /// Simulated seconds per evaluation run.
    pub eval_s: f64,
    /// Seeds used by `compare`.
    pub seeds: Vec<u64>,
    /// Worker threads for `compare`; results do not depend on it.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            training_episodes: 100,
            episode_s: 20.0,
            eval_s: 200.0,
            seeds: vec![1, 2, 3, 4, 5],
            threads: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.episode_s > 0.0 && self.episode_s.is_finite()) {
            return Err(Error::config("run.episode_s", "must be positive"));
        }
        if !(self.eval_s > 0.0 && self.eval_s.is_finite()) {
            return Err(Error::config("run.eval_s", "must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("run.seeds", "must not be empty"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::config("run.seeds", "must not repeat"));
        }
        if self.threads == 0 {
            return Err(Error::config("run.threads", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub world: WorldConfig,
    pub env: EnvConfig,
    pub policies: PolicyConfigs,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.env.validate()?;
        self.policies.exploration.validate()?;
        self.policies.optimization.validate()?;
        self.policies.q_learning.validate()?;
        self.policies.dqn.validate()?;
        self.policies.actor_critic.validate()?;
        self.run.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = if text.trim().is_empty() {
            Self::default()
        } else {
            serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Pretty JSON with every field spelled out.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Decisions a training run is expected to make, used to size the
    /// epsilon decay.
    pub fn expected_training_decisions(&self) -> f64 {
        self.run.training_episodes as f64
            * self.run.episode_s
            * self.world.fleet.vehicles as f64
            * self.world.fleet.arrival_rate
    }
}

/// Reads, parses and validates a config file. An empty file yields the defaults.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_json(&text).map_err(|e| match e {
        Error::ConfigParse(msg) => Error::ConfigParse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(
            ExperimentConfig::from_json("").unwrap(),
            ExperimentConfig::default()
        );
        assert_eq!(
            ExperimentConfig::from_json("{}").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn unknown_key_rejected() {
        let err =
            ExperimentConfig::from_json(r#"{"world": {"fleet": {"vehicle": 3}}}"#).unwrap_err();
        assert!(
            matches!(err, Error::ConfigParse(ref m) if m.contains("vehicle")),
            "{err}"
        );
    }

    #[test]
    fn zero_vehicles_rejected() {
        let err =
            ExperimentConfig::from_json(r#"{"world": {"fleet": {"vehicles": 0}}}"#).unwrap_err();
        assert!(
            matches!(err, Error::Config { ref field, .. } if field == "world.fleet.vehicles"),
            "{err}"
        );
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn inverted_speed_range_names_field() {
        let err = ExperimentConfig::from_json(
            r#"{"world": {"fleet": {"speed_kmh": {"min": 80, "max": 20}}}}"#,
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::Config { ref field, .. } if field == "world.fleet.speed_kmh"),
            "{err}"
        );
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.run.seeds = vec![9, 10, 11];
        cfg.policies.dqn.hidden = vec![16];
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn schedule_covers_half_the_budget() {
        let cfg = ExperimentConfig::default();
        let s = cfg
            .policies
            .exploration
            .schedule(cfg.expected_training_decisions());
        assert_eq!(s.decay_steps, 50_000);
    }
}
