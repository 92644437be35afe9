//! Fully connected Q-network with rectifier hidden layers and a linear head.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::argmax;
use crate::rng::{self, domain};

/// One affine layer; `weights` is `outputs x inputs`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.bias.iter().enumerate().map(|(o, &b)| {
            let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            b + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
        }));
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    layers: Vec<Dense>,
}

/// Parameter-shaped gradient buffers, one `(weights, bias)` pair per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(net: &QNetwork) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                .collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|(w, b)| w.iter().chain(b))
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, k: f64) {
        for (w, b) in &mut self.layers {
            w.iter_mut().chain(b.iter_mut()).for_each(|g| *g *= k);
        }
    }

    /// Rescales to global norm `max_norm` if larger; returns the original norm.
    pub fn clip_norm(&mut self, max_norm: f64) -> f64 {
        let n = self.norm();
        if n > max_norm && n > 0.0 {
            self.scale(max_norm / n);
        }
        n
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|(w, b)| w.iter().chain(b).copied()).collect()
    }
}

impl QNetwork {
    /// Network with layer widths `[input, hidden..., output]`, weights drawn
    /// uniformly in `+-sqrt(6 / fan_in)` and zero biases.
    pub fn new(widths: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(widths)?;
        let mut rng = rng::stream(seed, &[domain::INIT]);
        for layer in &mut net.layers {
            let bound = (6.0 / layer.inputs as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn zeros(widths: &[usize]) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::invalid(format!("bad layer widths {widths:?}")));
        }
        Ok(QNetwork {
            layers: widths.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        })
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("network needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::invalid(format!("layer {i} has inconsistent shapes")));
            }
            if i > 0 && layers[i - 1].outputs != l.inputs {
                return Err(Error::invalid(format!("layer {i} input width mismatch")));
            }
        }
        Ok(QNetwork { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.activations(x).pop().unwrap_or_default()
    }

    /// Index of the largest Q-value (lowest on ties).
    pub fn greedy(&self, x: &[f64]) -> usize {
        argmax(&self.forward(x))
    }

    /// Post-activation values of every layer, input first.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.apply(&acts[i], &mut out);
            if i < last {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(out);
        }
        acts
    }

    /// Mean squared error between `Q(s_i, a_i)` and `targets[i]` and its
    /// gradient. Only the chosen action's output contributes.
    pub fn loss_and_gradient(&self, states: &[&[f64]], actions: &[usize], targets: &[f64]) -> (f64, Gradients) {
        let mut grads = Gradients::zeros_like(self);
        let n = states.len();
        if n == 0 {
            return (0.0, grads);
        }
        let scale = 1.0 / n as f64;
        let mut loss = 0.0;
        let last = self.layers.len() - 1;
        for ((x, &a), &y) in states.iter().zip(actions).zip(targets) {
            let acts = self.activations(x);
            let err = acts[last + 1][a] - y;
            loss += err * err * scale;

            let mut delta = vec![0.0; self.output_dim()];
            delta[a] = 2.0 * err * scale;
            for l in (0..=last).rev() {
                let layer = &self.layers[l];
                let input = &acts[l];
                let (gw, gb) = &mut grads.layers[l];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    for (g, &xi) in gw[o * layer.inputs..(o + 1) * layer.inputs].iter_mut().zip(input) {
                        *g += d * xi;
                    }
                }
                if l > 0 {
                    let mut prev = vec![0.0; layer.inputs];
                    for (o, &d) in delta.iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        let w = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                        for (p, &wi) in prev.iter_mut().zip(w) {
                            *p += d * wi;
                        }
                    }
                    // rectifier derivative, taken from the stored activation
                    for (p, &act) in prev.iter_mut().zip(input) {
                        if act <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        (loss, grads)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::LengthMismatch {
                expected: self.param_count(),
                got: flat.len(),
            });
        }
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|p| *p = it.next().unwrap());
        }
        Ok(())
    }
}
