//! Small fully connected networks: forward and backward passes, Adam, and a
//! flat text format for weights.
//!
//! Parameters live in one flat vector. Layer `l` with `i` inputs and `o`
//! outputs stores its `o x i` weight matrix row-major, followed by its `o`
//! biases. Hidden layers use ReLU, the output layer is the identity.
//!
//! Weight file layout (UTF-8 text, one value per line after the header):
//!
//! ```text
//! mlp 1
//! 27 64 64 4
//! <param 0>
//! <param 1>
//! ...
//! ```
//!
//! Values are written with Rust's shortest round-trip float formatting, so a
//! save/load cycle reproduces every parameter bit for bit.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations recorded by [`Mlp::forward_trace`] for one input.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `acts[0]` is the input, `acts[l + 1]` the output of layer `l`.
    acts: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("trace has an input")
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// All-zero network.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Invalid(format!("bad layer sizes {sizes:?}")));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
        })
    }

    /// He-uniform weights, zero biases.
    pub fn new(sizes: &[usize], rng: &mut RngStream) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        let mut off = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            for p in &mut net.params[off..off + fan_in * fan_out] {
                *p = rng.inner().gen_range(-limit..limit);
            }
            off += fan_in * fan_out + fan_out;
        }
        Ok(net)
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        if params.len() != net.params.len() {
            return Err(Error::Dimension {
                expected: net.params.len(),
                got: params.len(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let trace = self.forward_trace(x)?;
        Ok(trace.acts.into_iter().last().expect("output layer"))
    }

    pub fn forward_trace(&self, x: &[f64]) -> Result<Trace> {
        self.check_input(x)?;
        let layers = self.sizes.len() - 1;
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(x.to_vec());
        let mut off = 0;
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let input = &acts[l];
            let mut out: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    b[o] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect();
            if l + 1 < layers {
                for v in &mut out {
                    *v = v.max(0.0);
                }
            }
            acts.push(out);
            off += n_in * n_out + n_out;
        }
        Ok(Trace { acts })
    }

    /// Adds `d loss / d params` for one traced input into `grads`.
    pub fn backward(&self, trace: &Trace, loss_grad: &[f64], grads: &mut [f64]) -> Result<()> {
        if loss_grad.len() != self.output_dim() {
            return Err(Error::Dimension {
                expected: self.output_dim(),
                got: loss_grad.len(),
            });
        }
        if grads.len() != self.params.len() {
            return Err(Error::Dimension {
                expected: self.params.len(),
                got: grads.len(),
            });
        }
        let layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(layers);
        let mut off = 0;
        for w in self.sizes.windows(2) {
            offsets.push(off);
            off += w[0] * w[1] + w[1];
        }
        let mut delta = loss_grad.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let input = &trace.acts[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let g = &mut grads[off + o * n_in..off + (o + 1) * n_in];
                for (gi, xi) in g.iter_mut().zip(input) {
                    *gi += d * xi;
                }
                grads[off + n_in * n_out + o] += d;
            }
            if l == 0 {
                break;
            }
            let w = &self.params[off..off + n_in * n_out];
            let mut prev = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (p, wi) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *p += d * wi;
                }
            }
            // ReLU derivative, taken as 0 at exactly 0.
            for (p, a) in prev.iter_mut().zip(input) {
                if *a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("mlp 1\n");
        let sizes: Vec<String> = self.sizes.iter().map(|n| n.to_string()).collect();
        s.push_str(&sizes.join(" "));
        s.push('\n');
        for p in &self.params {
            s.push_str(&format!("{p:?}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("mlp 1") {
            return Err(Error::Artifact("missing `mlp 1` header".into()));
        }
        let sizes: Vec<usize> = lines
            .next()
            .ok_or_else(|| Error::Artifact("missing layer sizes line".into()))?
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::Artifact(format!("bad layer size `{t}`")))
            })
            .collect::<Result<_>>()?;
        let params: Vec<f64> = lines
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                l.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Artifact(format!("parameter {i}: bad value `{l}`")))
            })
            .collect::<Result<_>>()?;
        Self::from_params(&sizes, params).map_err(|e| Error::Artifact(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Global gradient-norm clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: Some(10.0),
        }
    }
}

impl AdamConfig {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(
                format!("{prefix}.learning_rate"),
                "must be positive",
            ));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(
                    format!("{prefix}.{name}"),
                    "must lie in [0, 1)",
                ));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config(
                format!("{prefix}.epsilon"),
                "must be positive",
            ));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return Err(Error::config(
                    format!("{prefix}.clip_norm"),
                    "must be positive",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, param_count: usize) -> Self {
        Self {
            config,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            step: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn moments(&self) -> (&[f64], &[f64]) {
        (&self.m, &self.v)
    }

    /// One bias-corrected update. Fails if any parameter becomes non-finite.
    pub fn step(&mut self, net: &mut Mlp, grads: &[f64]) -> Result<()> {
        if grads.len() != net.params.len() || self.m.len() != grads.len() {
            return Err(Error::Dimension {
                expected: net.params.len(),
                got: grads.len(),
            });
        }
        let c = self.config;
        let mut scale = 1.0;
        if let Some(clip) = c.clip_norm {
            let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > clip {
                scale = clip / norm;
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        for (((p, g), m), v) in net
            .params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            let g = g * scale;
            *m = c.beta1 * *m + (1.0 - c.beta1) * g;
            *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
        }
        if !net.is_finite() {
            return Err(Error::NonFinite("adam step"));
        }
        Ok(())
    }
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Returns `(loss, d loss / d pred)`.
pub fn huber_loss(pred: f64, target: f64, delta: f64) -> (f64, f64) {
    let err = pred - target;
    if err.abs() <= delta {
        (0.5 * err * err, err)
    } else {
        (delta * (err.abs() - 0.5 * delta), delta * err.signum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> RngStream {
        RngStream::new(seed, "nn-init")
    }

    fn scalar_loss(net: &Mlp, x: &[f64], w: &[f64]) -> f64 {
        net.forward(x)
            .unwrap()
            .iter()
            .zip(w)
            .map(|(a, b)| a * b)
            .sum()
    }

    #[test]
    fn zero_net_outputs_bias() {
        let mut net = Mlp::zeros(&[3, 2]).unwrap();
        net.params_mut()[6] = 0.5;
        net.params_mut()[7] = -1.5;
        assert_eq!(net.forward(&[9.0, 8.0, 7.0]).unwrap(), vec![0.5, -1.5]);
    }

    #[test]
    fn identity_layer() {
        let mut p = vec![0.0; 9 + 3];
        for i in 0..3 {
            p[i * 3 + i] = 1.0;
        }
        let net = Mlp::from_params(&[3, 3], p).unwrap();
        assert_eq!(
            net.forward(&[1.0, -2.0, 3.5]).unwrap(),
            vec![1.0, -2.0, 3.5]
        );
    }

    #[test]
    fn zero_input_matches_zero_vector() {
        let net = Mlp::new(&[4, 8, 2], &mut rng(1)).unwrap();
        let x: Vec<f64> = [0.3, -1.0, 2.0, 0.1].iter().map(|v| v * 0.0).collect();
        assert_eq!(net.forward(&x).unwrap(), net.forward(&[0.0; 4]).unwrap());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let net = Mlp::zeros(&[3, 2]).unwrap();
        assert!(matches!(
            net.forward(&[1.0]),
            Err(Error::Dimension {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let net = Mlp::new(&[5, 7, 3], &mut rng(2)).unwrap();
        let x = [0.4, -0.3, 0.8, 0.1, -0.9];
        let w = [0.7, -1.1, 0.4];
        let mut grads = vec![0.0; net.param_count()];
        let trace = net.forward_trace(&x).unwrap();
        net.backward(&trace, &w, &mut grads).unwrap();
        let h = 1e-5;
        for i in 0..net.param_count() {
            let mut plus = net.clone();
            plus.params_mut()[i] += h;
            let mut minus = net.clone();
            minus.params_mut()[i] -= h;
            let fd = (scalar_loss(&plus, &x, &w) - scalar_loss(&minus, &x, &w)) / (2.0 * h);
            let denom = fd.abs().max(grads[i].abs()).max(1e-8);
            assert!(
                (fd - grads[i]).abs() / denom < 1e-4 || (fd - grads[i]).abs() < 1e-9,
                "param {i}"
            );
        }
    }

    #[test]
    fn zero_loss_grad_gives_zero_gradients() {
        let net = Mlp::new(&[3, 4, 2], &mut rng(3)).unwrap();
        let mut grads = vec![0.0; net.param_count()];
        let trace = net.forward_trace(&[1.0, 2.0, 3.0]).unwrap();
        net.backward(&trace, &[0.0, 0.0], &mut grads).unwrap();
        assert!(grads.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn gradients_are_linear_in_loss() {
        let net = Mlp::new(&[3, 4, 2], &mut rng(4)).unwrap();
        let trace = net.forward_trace(&[0.5, -0.5, 1.0]).unwrap();
        let (a, b) = ([1.0, 0.0], [0.3, -2.0]);
        let mut ga = vec![0.0; net.param_count()];
        let mut gb = vec![0.0; net.param_count()];
        let mut gab = vec![0.0; net.param_count()];
        net.backward(&trace, &a, &mut ga).unwrap();
        net.backward(&trace, &b, &mut gb).unwrap();
        net.backward(&trace, &[1.3, -2.0], &mut gab).unwrap();
        for i in 0..gab.len() {
            assert!((gab[i] - ga[i] - gb[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn adam_zero_gradient_keeps_params() {
        let mut net = Mlp::new(&[2, 2], &mut rng(5)).unwrap();
        let before = net.clone();
        let mut adam = Adam::new(AdamConfig::default(), net.param_count());
        let zeros = vec![0.0; net.param_count()];
        adam.step(&mut net, &zeros).unwrap();
        assert_eq!(net, before);
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn adam_first_step_is_learning_rate() {
        let mut net = Mlp::zeros(&[1, 1]).unwrap();
        let mut adam = Adam::new(AdamConfig::default(), 2);
        adam.step(&mut net, &[1.0, 0.0]).unwrap();
        // m_hat = 1, v_hat = 1, so the step is lr / (1 + eps).
        let expected = -1e-3 / (1.0 + 1e-8);
        assert!((net.params()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn adam_minimizes_quadratic() {
        let mut net = Mlp::zeros(&[1, 1]).unwrap();
        let mut adam = Adam::new(
            AdamConfig {
                learning_rate: 0.1,
                ..AdamConfig::default()
            },
            2,
        );
        for _ in 0..200 {
            let w = net.params()[0];
            adam.step(&mut net, &[2.0 * (w - 3.0), 0.0]).unwrap();
        }
        assert!((net.params()[0] - 3.0).abs() < 0.1, "{}", net.params()[0]);
    }

    #[test]
    fn adam_rejects_non_finite() {
        let mut net = Mlp::zeros(&[1, 1]).unwrap();
        let mut adam = Adam::new(AdamConfig::default(), 2);
        assert!(matches!(
            adam.step(&mut net, &[f64::NAN, 0.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn softmax_cases() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
        let p = softmax(&[1000.0, 0.0]);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1] >= 0.0 && p[1] < 1e-300 + 1e-12);
        let a = softmax(&[0.1, 2.0, -1.0]);
        let b = softmax(&[5.1, 7.0, 4.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn huber_branches() {
        assert_eq!(huber_loss(1.0, 1.0, 1.0), (0.0, 0.0));
        assert_eq!(huber_loss(1.5, 1.0, 1.0), (0.125, 0.5));
        assert_eq!(huber_loss(4.0, 1.0, 1.0), (2.5, 1.0));
        assert_eq!(huber_loss(-2.0, 1.0, 1.0), (2.5, -1.0));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let net = Mlp::new(&[6, 5, 3], &mut rng(6)).unwrap();
        let back = Mlp::from_text(&net.to_text()).unwrap();
        assert_eq!(back, net);
        let bits: Vec<u64> = back.params().iter().map(|p| p.to_bits()).collect();
        let orig: Vec<u64> = net.params().iter().map(|p| p.to_bits()).collect();
        assert_eq!(bits, orig);
    }

    #[test]
    fn corrupt_text_is_diagnosed() {
        assert!(matches!(Mlp::from_text("nope"), Err(Error::Artifact(_))));
        assert!(matches!(
            Mlp::from_text("mlp 1\n2 1\n0.5\n"),
            Err(Error::Artifact(_))
        ));
        assert!(matches!(
            Mlp::from_text("mlp 1\n1 1\nx\n0\n"),
            Err(Error::Artifact(_))
        ));
    }

    #[test]
    fn same_seed_same_init() {
        let a = Mlp::new(&[4, 8, 2], &mut rng(9)).unwrap();
        let b = Mlp::new(&[4, 8, 2], &mut rng(9)).unwrap();
        assert_eq!(a, b);
    }
}
