//! Dense feed-forward networks with hand-written backpropagation.
//!
//! A [`DenseNet`] is a chain of fully connected layers. [`DenseNet::forward`]
//! returns the output together with a [`Tape`] holding the per-layer inputs
//! and activations, which [`DenseNet::backward`] consumes to produce exact
//! parameter and input gradients of `upstream · output`.
//!
//! Parameters are optimized with [`Adam`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    #[serde(rename = "tanh")]
    Tanh,
    #[serde(rename = "id")]
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// One fully connected layer, `y = act(W x + b)`.
///
/// `weights` is row-major with `outputs` rows and `inputs` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
}

impl Layer {
    pub fn new(
        inputs: usize,
        outputs: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::Config("layer dimensions must be positive".into()));
        }
        check_len("layer weights", inputs * outputs, weights.len())?;
        check_len("layer bias", outputs, bias.len())?;
        Ok(Self {
            inputs,
            outputs,
            weights,
            bias,
            activation,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
            activation,
        }
    }

    /// Uniform initialization in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn uniform<R: Rng + ?Sized>(
        inputs: usize,
        outputs: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        let mut sample = || rng.gen_range(-bound..=bound);
        let weights = (0..inputs * outputs).map(|_| sample()).collect();
        let bias = (0..outputs).map(|_| sample()).collect();
        Self {
            inputs,
            outputs,
            weights,
            bias,
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.chunks_exact(self.inputs).zip(&self.bias) {
            let z: f64 = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b;
            out.push(self.activation.apply(z));
        }
    }
}

/// Cached intermediate values from one forward pass.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    /// `inputs[i]` is the input of layer `i`.
    inputs: Vec<Vec<f64>>,
    /// `outputs[i]` is the post-activation output of layer `i`.
    outputs: Vec<Vec<f64>>,
}

impl Tape {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Gradients with the same shape as a [`DenseNet`]'s parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(f64::is_finite)
    }

    /// All gradient entries in parameter order (layer by layer, weights then bias).
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().chain(&mut l.bias).for_each(|g| *g *= factor);
        }
    }

    fn matches(&self, net: &DenseNet) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.weights.len() == l.weights.len() && g.bias.len() == l.bias.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
}

impl DenseNet {
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            check_len("layer chain", pair[0].outputs, pair[1].inputs)?;
        }
        Ok(Self { layers })
    }

    /// Builds `sizes[0] -> sizes[1] -> ... -> sizes[n]` with `hidden` on every
    /// layer except the last, which uses `output`.
    pub fn uniform<R: Rng + ?Sized>(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        Self::build(sizes, hidden, output, |i, o, act| Layer::uniform(i, o, act, rng))
    }

    pub fn zeros(sizes: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        Self::build(sizes, hidden, output, Layer::zeros)
    }

    fn build(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        mut make: impl FnMut(usize, usize, Activation) -> Layer,
    ) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Config(format!("invalid layer sizes {sizes:?}")));
        }
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| make(w[0], w[1], if i == last { output } else { hidden }))
            .collect();
        Self::from_layers(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.parameters().all(f64::is_finite)
    }

    /// Parameters in the same order as [`Gradients::iter`].
    pub fn parameters(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
    }

    /// Mutable access to the `index`-th parameter in [`DenseNet::parameters`] order.
    pub fn parameter_mut(&mut self, mut index: usize) -> Option<&mut f64> {
        for l in &mut self.layers {
            let n = l.weights.len();
            if index < n {
                return Some(&mut l.weights[index]);
            }
            index -= n;
            if index < l.bias.len() {
                return Some(&mut l.bias[index]);
            }
            index -= l.bias.len();
        }
        None
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, Tape)> {
        check_len("network input", self.input_dim(), input.len())?;
        let mut tape = Tape {
            inputs: Vec::with_capacity(self.layers.len()),
            outputs: Vec::with_capacity(self.layers.len()),
        };
        let mut current = input.to_vec();
        for layer in &self.layers {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.forward_into(&current, &mut out);
            tape.inputs.push(current);
            current = out.clone();
            tape.outputs.push(out);
        }
        Ok((current, tape))
    }

    /// Forward pass without keeping a tape.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        check_len("network input", self.input_dim(), input.len())?;
        let mut current = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&current, &mut next);
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    /// Gradients of `upstream · output` with respect to the parameters and input.
    pub fn backward(&self, tape: &Tape, upstream: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        let mut grads = Gradients::zeros_like(self);
        let input_grad = self.backward_accumulate(tape, upstream, &mut grads)?;
        Ok((grads, input_grad))
    }

    /// Like [`DenseNet::backward`] but adds the parameter gradients into `grads`.
    pub fn backward_accumulate(
        &self,
        tape: &Tape,
        upstream: &[f64],
        grads: &mut Gradients,
    ) -> Result<Vec<f64>> {
        self.check_tape(tape)?;
        check_len("upstream gradient", self.output_dim(), upstream.len())?;
        if !grads.matches(self) {
            return Err(Error::Config("gradient buffer does not match network".into()));
        }
        let mut delta_out = upstream.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &tape.inputs[i];
            let output = &tape.outputs[i];
            let delta: Vec<f64> = delta_out
                .iter()
                .zip(output)
                .map(|(g, y)| g * layer.activation.derivative_from_output(*y))
                .collect();
            let lg = &mut grads.layers[i];
            let mut delta_in = vec![0.0; layer.inputs];
            for (r, d) in delta.iter().enumerate() {
                lg.bias[r] += d;
                if *d == 0.0 {
                    continue;
                }
                let row = &layer.weights[r * layer.inputs..(r + 1) * layer.inputs];
                let grow = &mut lg.weights[r * layer.inputs..(r + 1) * layer.inputs];
                for c in 0..layer.inputs {
                    grow[c] += d * input[c];
                    delta_in[c] += row[c] * d;
                }
            }
            delta_out = delta_in;
        }
        Ok(delta_out)
    }

    fn check_tape(&self, tape: &Tape) -> Result<()> {
        check_len("tape depth", self.layers.len(), tape.inputs.len())?;
        for (layer, (x, y)) in self.layers.iter().zip(tape.inputs.iter().zip(&tape.outputs)) {
            check_len("tape layer input", layer.inputs, x.len())?;
            check_len("tape layer output", layer.outputs, y.len())?;
        }
        Ok(())
    }

    pub fn to_checkpoint(&self) -> NetCheckpoint {
        NetCheckpoint {
            layers: self
                .layers
                .iter()
                .map(|l| LayerCheckpoint {
                    w: l.weights.clone(),
                    b: l.bias.clone(),
                    act: l.activation,
                })
                .collect(),
        }
    }

    pub fn from_checkpoint(ckpt: &NetCheckpoint) -> Result<Self> {
        let layers = ckpt
            .layers
            .iter()
            .map(|l| {
                let outputs = l.b.len();
                if outputs == 0 || l.w.len() % outputs != 0 {
                    return Err(Error::Config("malformed layer checkpoint".into()));
                }
                Layer::new(l.w.len() / outputs, outputs, l.w.clone(), l.b.clone(), l.act)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_layers(layers)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_checkpoint())?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::from_checkpoint(&serde_json::from_str(json)?)
    }
}

/// Serialized network: `{"layers": [{"w": [...], "b": [...], "act": "tanh"|"id"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetCheckpoint {
    pub layers: Vec<LayerCheckpoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCheckpoint {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub act: Activation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Applied,
    /// The gradients contained NaN or infinity; nothing was changed.
    SkippedNonFinite,
}

/// Adam moments for one network.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(net: &DenseNet, learning_rate: f64) -> Self {
        let n = net.parameter_count();
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, net: &mut DenseNet, grads: &Gradients) -> Result<StepOutcome> {
        if !grads.matches(net) || self.m.len() != net.parameter_count() {
            return Err(Error::Config("gradients do not match network".into()));
        }
        if !grads.is_finite() {
            return Ok(StepOutcome::SkippedNonFinite);
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let mut k = 0;
        for (layer, lg) in net.layers.iter_mut().zip(&grads.layers) {
            let params = layer.weights.iter_mut().chain(layer.bias.iter_mut());
            let gs = lg.weights.iter().chain(&lg.bias);
            for (p, g) in params.zip(gs) {
                let m = &mut self.m[k];
                let v = &mut self.v[k];
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                if *g != 0.0 || *m != 0.0 {
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                }
                k += 1;
            }
        }
        Ok(StepOutcome::Applied)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_returns_bias() {
        let mut net = DenseNet::zeros(&[3, 2], Activation::Tanh, Activation::Identity).unwrap();
        net.layers_mut()[0].bias_mut().copy_from_slice(&[0.25, -4.0]);
        let (out, _) = net.forward(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(out, vec![0.25, -4.0]);
    }

    #[test]
    fn one_by_one_linear() {
        let layer = Layer::new(1, 1, vec![2.0], vec![1.0], Activation::Identity).unwrap();
        let net = DenseNet::from_layers(vec![layer]).unwrap();
        assert_eq!(net.forward(&[3.0]).unwrap().0, vec![7.0]);
    }

    #[test]
    fn input_dimension_checked() {
        let net = DenseNet::zeros(&[2, 1], Activation::Tanh, Activation::Identity).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn broken_chain_rejected() {
        let a = Layer::zeros(2, 3, Activation::Tanh);
        let b = Layer::zeros(4, 1, Activation::Identity);
        assert!(DenseNet::from_layers(vec![a, b]).is_err());
    }

    #[test]
    fn linear_layer_gradients() {
        let w = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let layer = Layer::new(3, 2, w.clone(), vec![0.0, 0.0], Activation::Identity).unwrap();
        let net = DenseNet::from_layers(vec![layer]).unwrap();
        let v = [0.5, -1.0, 2.0];
        let u = [3.0, -2.0];
        let (_, tape) = net.forward(&v).unwrap();
        let (grads, input_grad) = net.backward(&tape, &u).unwrap();
        let outer: Vec<f64> = u.iter().flat_map(|ui| v.iter().map(move |vj| ui * vj)).collect();
        assert_eq!(grads.layers[0].weights, outer);
        assert_eq!(grads.layers[0].bias, u.to_vec());
        let wt_u: Vec<f64> = (0..3).map(|c| w[c] * u[0] + w[3 + c] * u[1]).collect();
        assert_eq!(input_grad, wt_u);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = DenseNet::uniform(&[3, 5, 2], Activation::Tanh, Activation::Tanh, &mut rng).unwrap();
        let (_, tape) = net.forward(&[0.1, 0.2, 0.3]).unwrap();
        let (grads, input_grad) = net.backward(&tape, &[0.0, 0.0]).unwrap();
        assert!(grads.iter().all(|g| g == 0.0));
        assert!(input_grad.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn stale_tape_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let small = DenseNet::uniform(&[2, 3, 1], Activation::Tanh, Activation::Identity, &mut rng).unwrap();
        let other = DenseNet::uniform(&[2, 4, 1], Activation::Tanh, Activation::Identity, &mut rng).unwrap();
        let (_, tape) = small.forward(&[1.0, 1.0]).unwrap();
        assert!(other.backward(&tape, &[1.0]).is_err());
    }

    #[test]
    fn adam_zero_grads_leave_net_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut net = DenseNet::uniform(&[2, 4, 1], Activation::Tanh, Activation::Identity, &mut rng).unwrap();
        let before = net.clone();
        let mut adam = Adam::new(&net, 1e-2);
        let zeros = Gradients::zeros_like(&net);
        for _ in 0..10 {
            assert_eq!(adam.step(&mut net, &zeros).unwrap(), StepOutcome::Applied);
        }
        assert_eq!(net, before);
    }

    #[test]
    fn adam_skips_nan_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut net = DenseNet::uniform(&[2, 4, 1], Activation::Tanh, Activation::Identity, &mut rng).unwrap();
        let before = net.clone();
        let mut adam = Adam::new(&net, 1e-2);
        let mut grads = Gradients::zeros_like(&net);
        grads.layers[0].weights[1] = f64::NAN;
        assert_eq!(adam.step(&mut net, &grads).unwrap(), StepOutcome::SkippedNonFinite);
        assert_eq!(net, before);
        assert_eq!(adam.steps(), 0);
    }

    #[test]
    fn adam_minimizes_quadratic() {
        // loss(p) = (p - 1.5)^2, minimizer 1.5.
        let layer = Layer::new(1, 1, vec![0.0], vec![0.0], Activation::Identity).unwrap();
        let mut net = DenseNet::from_layers(vec![layer]).unwrap();
        let mut adam = Adam::new(&net, 1e-2);
        let target = 1.5;
        for _ in 0..500 {
            let p = net.layers()[0].bias()[0];
            let mut grads = Gradients::zeros_like(&net);
            grads.layers[0].bias[0] = 2.0 * (p - target);
            adam.step(&mut net, &grads).unwrap();
        }
        assert!((net.layers()[0].bias()[0] - target).abs() < 1e-3);
    }

    #[test]
    fn checkpoint_json_shape() {
        let layer = Layer::new(2, 1, vec![0.5, -1.5], vec![2.0], Activation::Identity).unwrap();
        let net = DenseNet::from_layers(vec![layer]).unwrap();
        assert_eq!(
            net.to_json().unwrap(),
            r#"{"layers":[{"w":[0.5,-1.5],"b":[2.0],"act":"id"}]}"#
        );
    }

    #[test]
    fn malformed_checkpoint_rejected() {
        assert!(DenseNet::from_json(r#"{"layers":[{"w":[1,2,3],"b":[1,2],"act":"tanh"}]}"#).is_err());
        assert!(DenseNet::from_json(r#"{"layers":[]}"#).is_err());
    }
}
