//! Minimal dense feedforward classifier.
//!
//! A [`Network`] is a chain of dense layers; classification applies softmax
//! to the final layer output. The engine exposes exactly what a
//! gradient-sign attack needs from a model: class probabilities and the
//! analytic gradient of the cross-entropy loss with respect to the input.
//!
//! Networks are immutable once built or loaded, so concurrent read-only use
//! from parallel attack workers is safe. Training is single-threaded and
//! deterministic for a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::Dataset;

/// Elementwise nonlinearity of a dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f32) -> f32 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the post-activation value.
    #[inline]
    fn grad_from_output(self, y: f32) -> f32 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "relu" => Some(Activation::Relu),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// One dense affine transform plus activation. Weights are row-major with
/// shape `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    activation: Activation,
    weights: Vec<f32>,
    bias: Vec<f32>,
}

impl DenseLayer {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        weights: Vec<f32>,
        bias: Vec<f32>,
    ) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidConfig("layer dimensions must be positive".into()));
        }
        if weights.len() != in_dim * out_dim {
            return Err(Error::Shape(format!(
                "layer weights hold {} values, expected {}x{}",
                weights.len(),
                out_dim,
                in_dim
            )));
        }
        if bias.len() != out_dim {
            return Err(Error::Shape(format!(
                "layer bias holds {} values, expected {}",
                bias.len(),
                out_dim
            )));
        }
        Ok(Self {
            in_dim,
            out_dim,
            activation,
            weights,
            bias,
        })
    }

    /// Xavier-uniform initialization in `[-sqrt(6/(in+out)), +sqrt(6/(in+out))]`.
    pub fn xavier<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidConfig("layer dimensions must be positive".into()));
        }
        let limit = (6.0 / (in_dim + out_dim) as f32).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        let bias = vec![0.0; out_dim];
        Self::new(in_dim, out_dim, activation, weights, bias)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    fn forward(&self, input: &[f32]) -> Vec<f32> {
        let mut out = Vec::with_capacity(self.out_dim);
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.bias[o];
            for (w, x) in row.iter().zip(input) {
                acc = w.mul_add(*x, acc);
            }
            out.push(self.activation.apply(acc));
        }
        out
    }
}

/// Index of the largest component; ties resolve to the first.
pub fn argmax(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Max-subtracted softmax, safe against overflow on saturated inputs.
fn softmax_in_place(z: &mut [f32]) {
    let max = z.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut sum = 0.0f32;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Layered dense classifier with softmax class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<DenseLayer>,
    input_dim: usize,
    class_count: usize,
}

impl Network {
    /// Builds a network from explicit layers, checking that consecutive
    /// dimensions chain.
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(Error::Shape(format!(
                    "layer {} input {} does not chain with layer {} output {}",
                    k + 1,
                    pair[1].in_dim(),
                    k,
                    pair[0].out_dim()
                )));
            }
        }
        let input_dim = layers[0].in_dim();
        let class_count = layers.last().unwrap().out_dim();
        Ok(Self {
            layers,
            input_dim,
            class_count,
        })
    }

    /// Builds a seeded MLP: ReLU hidden layers of the given widths, identity
    /// output layer.
    pub fn mlp(input_dim: usize, hidden: &[usize], class_count: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 || class_count == 0 {
            return Err(Error::InvalidConfig(
                "input dimension and class count must be positive".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut prev = input_dim;
        for &width in hidden {
            layers.push(DenseLayer::xavier(prev, width, Activation::Relu, &mut rng)?);
            prev = width;
        }
        layers.push(DenseLayer::xavier(prev, class_count, Activation::Identity, &mut rng)?);
        Self::new(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    fn check_input(&self, x: &[f32]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Shape(format!(
                "input length {} does not match network input dimension {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    fn check_class(&self, y: usize) -> Result<()> {
        if y >= self.class_count {
            return Err(Error::Shape(format!(
                "class index {} out of range for {} classes",
                y, self.class_count
            )));
        }
        Ok(())
    }

    /// Class probabilities for one input.
    pub fn forward(&self, x: &[f32]) -> Result<Vec<f32>> {
        self.check_input(x)?;
        let mut cur = self.layers[0].forward(x);
        for layer in &self.layers[1..] {
            cur = layer.forward(&cur);
        }
        softmax_in_place(&mut cur);
        Ok(cur)
    }

    /// Cross-entropy loss against a one-hot label: `-ln F_y(x)`.
    pub fn loss(&self, x: &[f32], y: usize) -> Result<f64> {
        self.check_class(y)?;
        let probs = self.forward(x)?;
        Ok(-f64::from(probs[y]).ln())
    }

    /// Analytic gradient of the loss with respect to the input, via one
    /// backward pass.
    pub fn input_gradient(&self, x: &[f32], y: usize) -> Result<Vec<f32>> {
        self.check_input(x)?;
        self.check_class(y)?;
        // Forward, keeping each layer's post-activation.
        let mut acts: Vec<Vec<f32>> = Vec::with_capacity(self.layers.len());
        let mut cur = self.layers[0].forward(x);
        acts.push(cur.clone());
        for layer in &self.layers[1..] {
            cur = layer.forward(&cur);
            acts.push(cur.clone());
        }
        let mut probs = cur;
        softmax_in_place(&mut probs);

        // d(loss)/d(final post-activation) for softmax cross-entropy.
        let mut delta = probs;
        delta[y] -= 1.0;

        for (k, layer) in self.layers.iter().enumerate().rev() {
            let post = &acts[k];
            let prev_len = layer.in_dim();
            let mut dprev = vec![0.0f32; prev_len];
            for o in 0..layer.out_dim() {
                let dz = delta[o] * layer.activation.grad_from_output(post[o]);
                if dz == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * prev_len..(o + 1) * prev_len];
                for (dp, w) in dprev.iter_mut().zip(row) {
                    *dp = w.mul_add(dz, *dp);
                }
            }
            delta = dprev;
        }
        Ok(delta)
    }

    /// Fraction of samples whose predicted class matches the label.
    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        if data.input_dim() != self.input_dim {
            return Err(Error::Shape(format!(
                "dataset dimension {} does not match network input {}",
                data.input_dim(),
                self.input_dim
            )));
        }
        if data.is_empty() {
            return Err(Error::EmptyDataset("accuracy over an empty dataset".into()));
        }
        let mut hits = 0usize;
        for i in 0..data.len() {
            if argmax(&self.forward(data.sample(i))?) == data.label(i) {
                hits += 1;
            }
        }
        Ok(hits as f64 / data.len() as f64)
    }
}

/// Knobs for the mini-batch SGD trainer.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: u32,
    pub batch_size: usize,
    pub learning_rate: f32,
    /// Multiplier applied to the learning rate whenever an epoch fails to
    /// improve the best test accuracy so far; must lie in (0, 1].
    pub lr_decay_factor: f32,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 32,
            learning_rate: 0.05,
            lr_decay_factor: 0.3,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0) {
            return Err(Error::InvalidConfig("lr_decay_factor must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Trained network plus the per-epoch test accuracy trace.
#[derive(Debug)]
pub struct TrainRun {
    pub network: Network,
    pub epoch_test_accuracy: Vec<f64>,
}

/// Per-layer gradient buffers reused across samples of a batch.
struct GradBuffers {
    weights: Vec<Vec<f32>>,
    bias: Vec<Vec<f32>>,
}

impl GradBuffers {
    fn zeroed(net: &Network) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    fn clear(&mut self) {
        for w in &mut self.weights {
            w.fill(0.0);
        }
        for b in &mut self.bias {
            b.fill(0.0);
        }
    }
}

/// Accumulates one sample's parameter gradients into `grads`.
fn backward_params(net: &Network, x: &[f32], y: usize, grads: &mut GradBuffers) {
    let mut acts: Vec<Vec<f32>> = Vec::with_capacity(net.layers.len());
    let mut cur = net.layers[0].forward(x);
    acts.push(cur.clone());
    for layer in &net.layers[1..] {
        cur = layer.forward(&cur);
        acts.push(cur.clone());
    }
    let mut probs = cur;
    softmax_in_place(&mut probs);
    let mut delta = probs;
    delta[y] -= 1.0;

    for (k, layer) in net.layers.iter().enumerate().rev() {
        let post = &acts[k];
        let input: &[f32] = if k == 0 { x } else { &acts[k - 1] };
        let prev_len = layer.in_dim();
        let mut dprev = vec![0.0f32; prev_len];
        for o in 0..layer.out_dim() {
            let dz = delta[o] * layer.activation.grad_from_output(post[o]);
            grads.bias[k][o] += dz;
            if dz == 0.0 {
                continue;
            }
            let row = &layer.weights[o * prev_len..(o + 1) * prev_len];
            let grow = &mut grads.weights[k][o * prev_len..(o + 1) * prev_len];
            for i in 0..prev_len {
                grow[i] = dz.mul_add(input[i], grow[i]);
                dprev[i] = row[i].mul_add(dz, dprev[i]);
            }
        }
        delta = dprev;
    }
}

/// Mini-batch SGD with seeded shuffling and accuracy-gated learning-rate
/// decay. Deterministic: a fixed `(net, data, cfg.seed)` yields bit-identical
/// weights.
pub fn train(net: Network, train_data: &Dataset, test_data: &Dataset, cfg: &TrainConfig) -> Result<TrainRun> {
    cfg.validate()?;
    if train_data.is_empty() {
        return Err(Error::EmptyDataset("training set is empty".into()));
    }
    if train_data.input_dim() != net.input_dim || test_data.input_dim() != net.input_dim {
        return Err(Error::Shape(format!(
            "dataset dimension {} does not match network input {}",
            train_data.input_dim(),
            net.input_dim
        )));
    }
    if train_data.class_count() > net.class_count {
        return Err(Error::Shape(format!(
            "dataset has {} classes but network outputs {}",
            train_data.class_count(),
            net.class_count
        )));
    }

    let mut net = net;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_data.len()).collect();
    let mut grads = GradBuffers::zeroed(&net);
    let mut lr = cfg.learning_rate;
    let mut best_acc = f64::NEG_INFINITY;
    let mut epoch_test_accuracy = Vec::with_capacity(cfg.epochs as usize);

    for _ in 0..cfg.epochs {
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            for &i in batch {
                backward_params(&net, train_data.sample(i), train_data.label(i), &mut grads);
            }
            let scale = lr / batch.len() as f32;
            for (k, layer) in net.layers.iter_mut().enumerate() {
                for (w, g) in layer.weights.iter_mut().zip(&grads.weights[k]) {
                    *w -= scale * g;
                }
                for (b, g) in layer.bias.iter_mut().zip(&grads.bias[k]) {
                    *b -= scale * g;
                }
            }
        }
        let acc = net.accuracy(test_data)?;
        epoch_test_accuracy.push(acc);
        if acc > best_acc {
            best_acc = acc;
        } else {
            lr *= cfg.lr_decay_factor;
        }
    }

    Ok(TrainRun {
        network: net,
        epoch_test_accuracy,
    })
}
