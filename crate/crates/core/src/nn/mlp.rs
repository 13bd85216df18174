use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }

    pub fn code(self) -> u32 {
        match self {
            Activation::Tanh => 0,
            Activation::Relu => 1,
            Activation::Linear => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Activation::Tanh),
            1 => Some(Activation::Relu),
            2 => Some(Activation::Linear),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerSpan {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    biases: usize,
}

/// Fully connected network. All parameters live in one flat vector so
/// optimizers and serializers can treat them uniformly; layer `l` stores a
/// row-major `fan_out x fan_in` weight block followed by its biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    activations: Vec<Activation>,
    spans: Vec<LayerSpan>,
    params: Vec<f64>,
}

/// Intermediates of the last forward pass plus gradient accumulators.
#[derive(Debug, Clone, Default)]
pub struct GradientTape {
    /// `inputs[l]` feeds layer `l`; the last entry is the network output.
    inputs: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
    ready: bool,
    grads: Vec<f64>,
}

impl GradientTape {
    pub fn for_net(net: &Mlp) -> Self {
        GradientTape { grads: vec![0.0; net.num_params()], ..Default::default() }
    }

    pub fn grads(&self) -> &[f64] {
        &self.grads
    }

    pub fn grads_mut(&mut self) -> &mut [f64] {
        &mut self.grads
    }

    pub fn zero_grad(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = 0.0);
    }

    /// Pre-activations of every layer from the last forward pass.
    pub fn pre_activations(&self) -> &[Vec<f64>] {
        &self.pre_activations
    }
}

impl Mlp {
    /// Network with every parameter zero.
    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Result<Self, NnError> {
        if sizes.len() < 2 || activations.len() != sizes.len() - 1 {
            return Err(NnError::Architecture(format!(
                "{} layer sizes need {} activations, got {}",
                sizes.len(),
                sizes.len().saturating_sub(1),
                activations.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(NnError::Architecture("layer of width zero".into()));
        }
        let mut spans = Vec::with_capacity(activations.len());
        let mut offset = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            spans.push(LayerSpan { fan_in, fan_out, weights: offset, biases: offset + fan_in * fan_out });
            offset += fan_in * fan_out + fan_out;
        }
        Ok(Mlp { sizes: sizes.to_vec(), activations: activations.to_vec(), spans, params: vec![0.0; offset] })
    }

    /// Seeded scaled-uniform initialization: weights of layer `l` are drawn
    /// from U(-a, a) with `a = gain * sqrt(3 / fan_in)`, so each output unit
    /// starts with weight norm close to `gain`. Hidden layers use gain sqrt(2)
    /// for relu and 1 otherwise; the output layer uses `output_gain`. Biases
    /// start at zero.
    pub fn new(sizes: &[usize], activations: &[Activation], output_gain: f64, seed: u64) -> Result<Self, NnError> {
        let mut net = Self::zeros(sizes, activations)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = net.spans.len() - 1;
        for (l, span) in net.spans.iter().enumerate() {
            let gain = if l == last {
                output_gain
            } else if net.activations[l] == Activation::Relu {
                std::f64::consts::SQRT_2
            } else {
                1.0
            };
            let a = gain * (3.0 / span.fan_in as f64).sqrt();
            for w in &mut net.params[span.weights..span.biases] {
                *w = if a > 0.0 { rng.random_range(-a..a) } else { 0.0 };
            }
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<(), NnError> {
        if params.len() != self.params.len() {
            return Err(NnError::Dimension { expected: self.params.len(), got: params.len() });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// Weight `(row, col)` of layer `layer`; handy for hand-built test nets.
    pub fn weight_mut(&mut self, layer: usize, row: usize, col: usize) -> &mut f64 {
        let s = self.spans[layer];
        &mut self.params[s.weights + row * s.fan_in + col]
    }

    pub fn bias_mut(&mut self, layer: usize, row: usize) -> &mut f64 {
        let s = self.spans[layer];
        &mut self.params[s.biases + row]
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NnError> {
        if x.len() != self.input_dim() {
            return Err(NnError::Dimension { expected: self.input_dim(), got: x.len() });
        }
        Ok(())
    }

    fn affine(&self, span: &LayerSpan, x: &[f64], z: &mut Vec<f64>) {
        z.clear();
        let w = &self.params[span.weights..span.biases];
        let b = &self.params[span.biases..span.biases + span.fan_out];
        for (row, bias) in w.chunks_exact(span.fan_in).zip(b) {
            z.push(bias + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>());
        }
    }

    /// Inference pass without caching.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(x)?;
        let mut a = x.to_vec();
        let mut z = Vec::new();
        for (span, act) in self.spans.iter().zip(&self.activations) {
            self.affine(span, &a, &mut z);
            a.clear();
            a.extend(z.iter().map(|&v| act.apply(v)));
        }
        Ok(a)
    }

    /// Forward pass that records intermediates on `tape` for [`Mlp::backward`].
    pub fn forward_tape(&self, x: &[f64], tape: &mut GradientTape) -> Result<Vec<f64>, NnError> {
        self.check_input(x)?;
        let n = self.spans.len();
        tape.inputs.resize(n + 1, Vec::new());
        tape.pre_activations.resize(n, Vec::new());
        if tape.grads.len() != self.params.len() {
            tape.grads = vec![0.0; self.params.len()];
        }
        tape.inputs[0].clear();
        tape.inputs[0].extend_from_slice(x);
        for l in 0..n {
            let (head, tail) = tape.inputs.split_at_mut(l + 1);
            let z = &mut tape.pre_activations[l];
            self.affine(&self.spans[l], &head[l], z);
            let act = self.activations[l];
            tail[0].clear();
            tail[0].extend(z.iter().map(|&v| act.apply(v)));
        }
        tape.ready = true;
        Ok(tape.inputs[n].clone())
    }

    /// Reverse pass for the last [`Mlp::forward_tape`]: adds the gradient of
    /// `output . upstream` with respect to every parameter into the tape's
    /// accumulators and returns the gradient with respect to the input.
    pub fn backward(&self, tape: &mut GradientTape, upstream: &[f64]) -> Result<Vec<f64>, NnError> {
        if !tape.ready || tape.inputs.len() != self.spans.len() + 1 {
            return Err(NnError::NoForward);
        }
        if upstream.len() != self.output_dim() {
            return Err(NnError::Dimension { expected: self.output_dim(), got: upstream.len() });
        }
        let mut delta = upstream.to_vec();
        for l in (0..self.spans.len()).rev() {
            let span = self.spans[l];
            let act = self.activations[l];
            let z = &tape.pre_activations[l];
            let a_out = &tape.inputs[l + 1];
            for i in 0..span.fan_out {
                delta[i] *= act.derivative(z[i], a_out[i]);
            }
            let x = &tape.inputs[l];
            let mut upstream_next = vec![0.0; span.fan_in];
            for i in 0..span.fan_out {
                let d = delta[i];
                tape.grads[span.biases + i] += d;
                if d == 0.0 {
                    continue;
                }
                let row = span.weights + i * span.fan_in;
                let w = &self.params[row..row + span.fan_in];
                let g = &mut tape.grads[row..row + span.fan_in];
                for j in 0..span.fan_in {
                    g[j] += d * x[j];
                    upstream_next[j] += d * w[j];
                }
            }
            delta = upstream_next;
        }
        Ok(delta)
    }
}
