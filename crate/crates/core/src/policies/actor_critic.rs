//! Advantage actor-critic with a shared trunk.
//!
//! One network outputs `|A|` policy logits followed by a scalar state value;
//! the two heads share every hidden layer.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, DecisionContext, Mode, Policy};
use crate::env::{StateVector, Transition};
use crate::error::{Error, Result};
use crate::nn::{softmax, Adam, AdamConfig, Mlp};
use crate::sim::RngStream;
use crate::world::Action;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActorCriticConfig {
    pub hidden: Vec<usize>,
    pub optimizer: AdamConfig,
    pub entropy_coef: f64,
    /// Scale on the critic's squared-advantage loss in the joint update.
    pub value_coef: f64,
}

impl Default for ActorCriticConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            optimizer: AdamConfig::default(),
            entropy_coef: 0.01,
            value_coef: 0.5,
        }
    }
}

impl ActorCriticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.contains(&0) {
            return Err(Error::config(
                "policies.actor_critic.hidden",
                "layer widths must be positive",
            ));
        }
        self.optimizer.validate("policies.actor_critic.optimizer")?;
        if !(self.entropy_coef >= 0.0 && self.entropy_coef.is_finite()) {
            return Err(Error::config(
                "policies.actor_critic.entropy_coef",
                "must be >= 0",
            ));
        }
        if !(self.value_coef > 0.0 && self.value_coef.is_finite()) {
            return Err(Error::config(
                "policies.actor_critic.value_coef",
                "must be positive",
            ));
        }
        Ok(())
    }

    /// Output layer holds `actions` logits followed by the value.
    pub fn layer_sizes(&self, input_dim: usize, actions: usize) -> Vec<usize> {
        let mut sizes = vec![input_dim];
        sizes.extend(&self.hidden);
        sizes.push(actions + 1);
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcLosses {
    pub actor: f64,
    pub critic: f64,
    pub advantage: f64,
}

#[derive(Debug, Clone)]
pub struct ActorCriticAgent {
    pub config: ActorCriticConfig,
    pub net: Mlp,
    discount: f64,
    adam: Adam,
    rng: RngStream,
    mode: Mode,
}

impl ActorCriticAgent {
    pub fn new(
        config: ActorCriticConfig,
        input_dim: usize,
        discount: f64,
        seed: u64,
    ) -> Result<Self> {
        Self::with_actions(config, input_dim, Action::COUNT, discount, seed)
    }

    pub fn with_actions(
        config: ActorCriticConfig,
        input_dim: usize,
        actions: usize,
        discount: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut init = RngStream::new(seed, "nn-init");
        let net = Mlp::new(&config.layer_sizes(input_dim, actions), &mut init)?;
        Ok(Self::from_net(config, net, discount, seed))
    }

    fn actions(&self) -> usize {
        self.net.output_dim() - 1
    }

    fn from_net(config: ActorCriticConfig, net: Mlp, discount: f64, seed: u64) -> Self {
        Self {
            adam: Adam::new(config.optimizer, net.param_count()),
            net,
            config,
            discount,
            rng: RngStream::new(seed, "actor-critic-sample"),
            mode: Mode::Training,
        }
    }

    /// Action distribution and state value.
    pub fn evaluate(&self, state: &StateVector) -> Result<(Vec<f64>, f64)> {
        let out = self.net.forward(state.as_slice())?;
        let n = self.actions();
        Ok((softmax(&out[..n]), out[n]))
    }

    /// Samples from the policy while training, takes the modal action otherwise.
    pub fn select(&mut self, state: &StateVector) -> Result<usize> {
        let (probs, _) = self.evaluate(state)?;
        let i = match self.mode {
            Mode::Evaluation => argmax(&probs),
            Mode::Training => {
                let u: f64 = self.rng.inner().gen();
                let mut acc = 0.0;
                let mut pick = probs.len() - 1;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                pick
            }
        };
        Ok(i)
    }

    /// Joint actor and critic update on one transition.
    pub fn train_step(&mut self, t: &Transition) -> Result<AcLosses> {
        let n = self.actions();
        let trace = self.net.forward_trace(t.state.as_slice())?;
        let out = trace.output();
        let probs = softmax(&out[..n]);
        let v = out[n];
        let v_next = if t.done {
            0.0
        } else {
            self.net.forward(t.next_state.as_slice())?[n]
        };
        let adv = t.reward + self.discount * v_next - v;
        let entropy: f64 = -probs
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>();
        let log_pa = probs[t.action].max(f64::MIN_POSITIVE).ln();
        let c = self.config.entropy_coef;

        let mut grad = vec![0.0; n + 1];
        for (j, p) in probs.iter().enumerate() {
            let onehot = if j == t.action { 1.0 } else { 0.0 };
            let log_p = p.max(f64::MIN_POSITIVE).ln();
            // d(-log pi(a) * A)/dz_j and d(-c H)/dz_j.
            grad[j] = (p - onehot) * adv + c * p * (log_p + entropy);
        }
        // d(A^2)/dV(s) with the bootstrap target held fixed.
        grad[n] = -2.0 * adv * self.config.value_coef;
        let mut grads = vec![0.0; self.net.param_count()];
        self.net.backward(&trace, &grad, &mut grads)?;
        self.adam.step(&mut self.net, &grads)?;
        Ok(AcLosses {
            actor: -log_pa * adv - c * entropy,
            critic: adv * adv,
            advantage: adv,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.net.save(path)
    }

    pub fn load(
        path: &Path,
        config: ActorCriticConfig,
        input_dim: usize,
        discount: f64,
    ) -> Result<Self> {
        let net = Mlp::load(path)?;
        let expected = config.layer_sizes(input_dim, Action::COUNT);
        if net.layer_sizes() != expected.as_slice() {
            return Err(Error::Artifact(format!(
                "network layers {:?} do not match configured {:?}",
                net.layer_sizes(),
                expected
            )));
        }
        let mut agent = Self::from_net(config, net, discount, 0);
        agent.mode = Mode::Evaluation;
        Ok(agent)
    }
}

impl Policy for ActorCriticAgent {
    fn name(&self) -> &'static str {
        "actor-critic"
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Action {
        Action::ALL[self
            .select(ctx.state)
            .expect("state dimension matches the network")]
    }

    fn learn(&mut self, transition: &Transition) -> Result<()> {
        if self.mode == Mode::Training {
            self.train_step(transition)?;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::StateKey;

    const KEY: StateKey = StateKey {
        origin: 0,
        size: 0,
        deadline: 0,
        loads: [0; 3],
    };

    fn tr(reward: f64, done: bool) -> Transition {
        Transition {
            state: StateVector(vec![0.0, 0.0]),
            key: KEY,
            action: 1,
            reward,
            next_state: StateVector(vec![0.0, 0.0]),
            next_key: KEY,
            done,
        }
    }

    fn zero_agent() -> ActorCriticAgent {
        let cfg = ActorCriticConfig {
            hidden: vec![4],
            ..ActorCriticConfig::default()
        };
        let net = Mlp::zeros(&cfg.layer_sizes(2, Action::COUNT)).unwrap();
        ActorCriticAgent::from_net(cfg, net, 0.9, 1)
    }

    #[test]
    fn zero_advantage_leaves_critic_alone() {
        let mut agent = zero_agent();
        let l = agent.train_step(&tr(0.0, false)).unwrap();
        assert_eq!(l.advantage, 0.0);
        assert_eq!(l.critic, 0.0);
    }

    #[test]
    fn terminal_advantage_is_reward_minus_value() {
        let mut agent = ActorCriticAgent::new(ActorCriticConfig::default(), 2, 0.9, 3).unwrap();
        let t = Transition {
            state: StateVector(vec![0.3, 0.9]),
            next_state: StateVector(vec![0.8, 0.1]),
            ..tr(0.7, true)
        };
        let (_, v) = agent.evaluate(&t.state).unwrap();
        let l = agent.train_step(&t).unwrap();
        assert_eq!(l.advantage, 0.7 - v);
    }

    #[test]
    fn policy_stays_a_distribution() {
        let mut agent = ActorCriticAgent::new(ActorCriticConfig::default(), 2, 0.9, 4).unwrap();
        for i in 0..200 {
            let r = if i % 3 == 0 { 5.0 } else { -3.0 };
            agent.train_step(&tr(r, i % 2 == 0)).unwrap();
            let (p, _) = agent.evaluate(&StateVector(vec![0.0, 0.0])).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|x| *x >= 0.0));
        }
    }
}
