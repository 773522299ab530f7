//! Feedforward network with sigmoid output, trained by minibatch SGD on
//! binary cross-entropy.
//!
//! Used both as a standalone classifier and as the stacking meta-learner.
//! The first layer accepts sparse rows directly so the network can run on
//! TFIDF vectors without densifying them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{sigmoid, Classifier, Dataset};
use crate::matrix::RowRef;
use crate::{Error, Result};

/// Log arguments are clamped here so the loss stays finite.
pub const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn derivative(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnConfig {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub seed: u64,
    /// Start from all-zero weights instead of the Glorot draw.
    pub zero_init: bool,
}

impl Default for AnnConfig {
    fn default() -> Self {
        AnnConfig {
            input_dim: 1,
            hidden_layers: vec![32],
            activation: Activation::Relu,
            lr: 0.01,
            epochs: 100,
            batch_size: 32,
            l2: 1e-4,
            seed: 0,
            zero_init: false,
        }
    }
}

impl AnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim < 1 || self.hidden_layers.iter().any(|&w| w < 1) {
            return Err(Error::InvalidConfig("ann layer widths must be >= 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidConfig("ann lr must be positive".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidConfig("ann batch_size must be >= 1".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidConfig("ann l2 must be non-negative".into()));
        }
        Ok(())
    }
}

/// Dense layer; `weights` is `out_dim x in_dim`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Layer {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
        }
    }

    fn row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.in_dim..(o + 1) * self.in_dim]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnModel {
    pub config: AnnConfig,
    pub layers: Vec<Layer>,
    /// Full training objective after each epoch.
    pub loss_history: Vec<f64>,
}

/// Gradient of the objective, shaped like the layers.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnGradient {
    pub layers: Vec<Layer>,
}

pub fn ann_init(config: &AnnConfig) -> Result<AnnModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut widths = vec![config.input_dim];
    widths.extend(&config.hidden_layers);
    widths.push(1);
    let layers = widths
        .windows(2)
        .map(|w| {
            let mut layer = Layer::zeros(w[0], w[1]);
            if !config.zero_init {
                let r = (6.0 / (w[0] + w[1]) as f64).sqrt();
                layer.weights.iter_mut().for_each(|x| *x = rng.gen_range(-r..=r));
            }
            layer
        })
        .collect();
    Ok(AnnModel {
        config: config.clone(),
        layers,
        loss_history: Vec::new(),
    })
}

impl AnnModel {
    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    /// Activations of every layer; the last entry holds the single output
    /// probability.
    fn activations(&self, x: RowRef<'_>) -> Vec<Vec<f64>> {
        let last = self.layers.len() - 1;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let z: Vec<f64> = match acts.last() {
                None => (0..layer.out_dim)
                    .map(|o| x.dot(layer.row(o)) + layer.biases[o])
                    .collect(),
                Some(prev) => (0..layer.out_dim)
                    .map(|o| dot(layer.row(o), prev) + layer.biases[o])
                    .collect(),
            };
            let a = if l == last {
                z.into_iter().map(sigmoid).collect()
            } else {
                z.into_iter().map(|v| self.config.activation.apply(v)).collect()
            };
            acts.push(a);
        }
        acts
    }

    pub fn forward(&self, x: RowRef<'_>) -> Result<f64> {
        x.check_dim(self.input_dim())?;
        Ok(self.activations(x).last().expect("at least one layer")[0])
    }

    fn weight_norm_sq(&self) -> f64 {
        self.layers.iter().flat_map(|l| l.weights.iter()).map(|w| w * w).sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn bce(p: f64, y: f64) -> f64 {
    -(y * p.max(LOG_CLAMP).ln() + (1.0 - y) * (1.0 - p).max(LOG_CLAMP).ln())
}

/// Mean cross-entropy over `rows` plus `l2/2` times the squared weight norm
/// (biases are not penalised).
pub fn ann_objective(model: &AnnModel, data: &Dataset, rows: &[usize]) -> f64 {
    let data_loss: f64 = rows
        .iter()
        .map(|&i| {
            let p = model.activations(data.x.row(i)).last().expect("layers")[0];
            bce(p, data.y[i].as_f64())
        })
        .sum();
    data_loss / rows.len() as f64 + 0.5 * model.config.l2 * model.weight_norm_sq()
}

/// Backpropagated gradient of [`ann_objective`]. Where the output clamp is
/// inactive the output delta is exactly `p - y`.
pub fn ann_gradient(model: &AnnModel, data: &Dataset, rows: &[usize]) -> AnnGradient {
    let mut grads: Vec<Layer> = model.layers.iter().map(|l| Layer::zeros(l.in_dim, l.out_dim)).collect();
    let n = rows.len() as f64;
    let last = model.layers.len() - 1;
    for &i in rows {
        let x = data.x.row(i);
        let acts = model.activations(x);
        let mut delta = vec![(acts[last][0] - data.y[i].as_f64()) / n];
        for l in (0..model.layers.len()).rev() {
            let layer = &model.layers[l];
            let g = &mut grads[l];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.biases[o] += d;
                let gw = &mut g.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                if l == 0 {
                    x.axpy_into(d, gw);
                } else {
                    gw.iter_mut().zip(&acts[l - 1]).for_each(|(w, a)| *w += d * a);
                }
            }
            if l > 0 {
                let prev = &acts[l - 1];
                delta = (0..layer.in_dim)
                    .map(|j| {
                        let back: f64 = delta
                            .iter()
                            .enumerate()
                            .map(|(o, d)| d * layer.weights[o * layer.in_dim + j])
                            .sum();
                        back * model.config.activation.derivative(prev[j])
                    })
                    .collect();
            }
        }
    }
    let l2 = model.config.l2;
    if l2 > 0.0 {
        for (g, layer) in grads.iter_mut().zip(&model.layers) {
            g.weights
                .iter_mut()
                .zip(&layer.weights)
                .for_each(|(gw, w)| *gw += l2 * w);
        }
    }
    AnnGradient { layers: grads }
}

/// Per-epoch progress hook: `(epoch, objective)`.
pub type EpochCallback<'a> = &'a mut dyn FnMut(usize, f64);

/// Minibatch SGD. Rows are reshuffled every epoch from a generator seeded
/// with the config seed.
pub fn ann_train(mut model: AnnModel, data: &Dataset, mut on_epoch: Option<EpochCallback<'_>>) -> Result<AnnModel> {
    model.config.validate()?;
    data.check(true)?;
    if data.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: data.dim(),
        });
    }
    let cfg = model.config.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_a11c);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let all = order.clone();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let grad = ann_gradient(&model, data, batch);
            for (layer, g) in model.layers.iter_mut().zip(&grad.layers) {
                layer
                    .weights
                    .iter_mut()
                    .zip(&g.weights)
                    .for_each(|(w, d)| *w -= cfg.lr * d);
                layer
                    .biases
                    .iter_mut()
                    .zip(&g.biases)
                    .for_each(|(b, d)| *b -= cfg.lr * d);
            }
        }
        let loss = ann_objective(&model, data, &all);
        if !loss.is_finite() {
            return Err(Error::DivergenceDetected { epoch });
        }
        model.loss_history.push(loss);
        if let Some(cb) = on_epoch.as_mut() {
            cb(epoch, loss);
        }
    }
    Ok(model)
}

impl Classifier for AnnModel {
    fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    fn score(&self, x: RowRef<'_>) -> Result<f64> {
        self.forward(x)
    }
}
