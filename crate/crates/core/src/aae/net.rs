//! Dense feedforward networks with manual backpropagation and Adam.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative expressed through the activation output `a`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

/// Affine map plus activation. Weights are row-major `output_dim x input_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

impl Layer {
    /// Symmetric uniform initialisation scaled by fan-in.
    fn init(input_dim: usize, output_dim: usize, activation: Activation, rng: &mut ChaCha12Rng) -> Self {
        let bound = 1.0 / (input_dim as f64).sqrt();
        let weights = (0..input_dim * output_dim)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        let biases = vec![0.0; output_dim];
        Self {
            weights,
            biases,
            input_dim,
            output_dim,
            activation,
        }
    }
}

/// Multi-layer perceptron.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Forward-pass record needed by backpropagation: the input followed by
/// every layer's activation output.
pub struct Trace {
    pub activations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().unwrap()
    }
}

/// Per-layer parameter gradients, laid out like the network itself.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpGrads {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for v in w {
                *v *= factor;
            }
        }
        for b in &mut self.biases {
            for v in b {
                *v *= factor;
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }
}

impl Mlp {
    /// Build a network from consecutive layer widths; all hidden layers use
    /// `hidden`, the final layer uses `output`.
    pub fn new(dims: &[usize], hidden: Activation, output: Activation, rng: &mut ChaCha12Rng) -> Self {
        assert!(dims.len() >= 2, "need at least input and output widths");
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i + 2 == dims.len() { output } else { hidden };
                Layer::init(w[0], w[1], act, rng)
            })
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.input_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.output_dim)
    }

    /// Plain forward pass.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        for layer in &self.layers {
            a = layer_forward(layer, &a);
        }
        a
    }

    /// Forward pass retaining every activation for backpropagation.
    pub fn forward_trace(&self, x: &[f64]) -> Trace {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_vec());
        for layer in &self.layers {
            let next = layer_forward(layer, activations.last().unwrap());
            activations.push(next);
        }
        Trace { activations }
    }

    /// Pre-activation (logit) of the final layer; the activations of earlier
    /// layers come from `trace`.
    pub fn last_logit(&self, trace: &Trace) -> Vec<f64> {
        let layer = self.layers.last().unwrap();
        let input = &trace.activations[trace.activations.len() - 2];
        affine(layer, input)
    }

    /// Backpropagate `grad_output` (dL/d output activation), accumulating
    /// parameter gradients into `grads` and returning dL/d input.
    pub fn backward(&self, trace: &Trace, grad_output: &[f64], grads: &mut MlpGrads) -> Vec<f64> {
        let last = self.layers.len() - 1;
        let out_act = &trace.activations[last + 1];
        let delta: Vec<f64> = grad_output
            .iter()
            .zip(out_act.iter())
            .map(|(&g, &a)| g * self.layers[last].activation.derivative_from_output(a))
            .collect();
        self.backward_from_delta(trace, delta, grads)
    }

    /// Backpropagate a gradient already expressed at the final layer's
    /// pre-activation (used for numerically stable sigmoid-logit losses).
    pub fn backward_from_logit(
        &self,
        trace: &Trace,
        grad_logit: Vec<f64>,
        grads: &mut MlpGrads,
    ) -> Vec<f64> {
        self.backward_from_delta(trace, grad_logit, grads)
    }

    fn backward_from_delta(
        &self,
        trace: &Trace,
        mut delta: Vec<f64>,
        grads: &mut MlpGrads,
    ) -> Vec<f64> {
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let input = &trace.activations[li];
            let gw = &mut grads.weights[li];
            for (o, &d) in delta.iter().enumerate() {
                let row = &mut gw[o * layer.input_dim..(o + 1) * layer.input_dim];
                for (gwv, &inp) in row.iter_mut().zip(input.iter()) {
                    *gwv += d * inp;
                }
                grads.biases[li][o] += d;
            }
            // dL/d input = W^T delta
            let mut grad_in = vec![0.0; layer.input_dim];
            for (o, &d) in delta.iter().enumerate() {
                let row = &layer.weights[o * layer.input_dim..(o + 1) * layer.input_dim];
                for (gi, &w) in grad_in.iter_mut().zip(row.iter()) {
                    *gi += w * d;
                }
            }
            if li > 0 {
                let prev_act = &trace.activations[li];
                let act = self.layers[li - 1].activation;
                delta = grad_in
                    .iter()
                    .zip(prev_act.iter())
                    .map(|(&g, &a)| g * act.derivative_from_output(a))
                    .collect();
            } else {
                return grad_in;
            }
        }
        unreachable!("networks always have at least one layer")
    }
}

fn affine(layer: &Layer, input: &[f64]) -> Vec<f64> {
    debug_assert_eq!(input.len(), layer.input_dim);
    let mut out = Vec::with_capacity(layer.output_dim);
    for o in 0..layer.output_dim {
        let row = &layer.weights[o * layer.input_dim..(o + 1) * layer.input_dim];
        let mut acc = layer.biases[o];
        for (&w, &x) in row.iter().zip(input.iter()) {
            acc += w * x;
        }
        out.push(acc);
    }
    out
}

fn layer_forward(layer: &Layer, input: &[f64]) -> Vec<f64> {
    let mut out = affine(layer, input);
    for v in &mut out {
        *v = layer.activation.apply(*v);
    }
    out
}

/// Adam optimiser state for one network.
pub struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    mb: Vec<Vec<f64>>,
    vb: Vec<Vec<f64>>,
    t: u64,
    pub learning_rate: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        Self {
            m: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            v: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            mb: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
            vb: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
            t: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &MlpGrads) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (li, layer) in net.layers.iter_mut().enumerate() {
            update(
                &mut layer.weights,
                &grads.weights[li],
                &mut self.m[li],
                &mut self.v[li],
                self.learning_rate,
                self.beta1,
                self.beta2,
                self.eps,
                bc1,
                bc2,
            );
            update(
                &mut layer.biases,
                &grads.biases[li],
                &mut self.mb[li],
                &mut self.vb[li],
                self.learning_rate,
                self.beta1,
                self.beta2,
                self.eps,
                bc1,
                bc2,
            );
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    b1: f64,
    b2: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        m[i] = b1 * m[i] + (1.0 - b1) * grads[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grads[i] * grads[i];
        let mhat = m[i] / bc1;
        let vhat = v[i] / bc2;
        params[i] -= lr * mhat / (vhat.sqrt() + eps);
    }
}

/// Numerically stable softplus, `ln(1 + e^z)`.
#[inline]
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}
