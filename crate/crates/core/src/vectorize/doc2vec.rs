//! PV-DM paragraph vectors with negative sampling.
//!
//! The network has three layers: an input layer selecting the document
//! vector and the window's context word vectors, a `dim`-wide hidden layer
//! holding their mean, and an output layer of per-word vectors scored with a
//! sigmoid against the true centre word and `negatives` sampled noise words.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TokenSeq;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Doc2VecConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub lr0: f64,
    pub min_count: usize,
    pub seed: u64,
    /// Gradient passes used by [`d2v_infer`] for unseen documents.
    pub infer_steps: usize,
}

impl Default for Doc2VecConfig {
    fn default() -> Self {
        Doc2VecConfig {
            dim: 100,
            window: 5,
            epochs: 20,
            negatives: 5,
            lr0: 0.025,
            min_count: 1,
            seed: 0,
            infer_steps: 20,
        }
    }
}

impl Doc2VecConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dim", self.dim),
            ("window", self.window),
            ("epochs", self.epochs),
            ("negatives", self.negatives),
            ("min_count", self.min_count),
        ] {
            if v < 1 {
                return Err(Error::InvalidConfig(format!("doc2vec {name} must be >= 1")));
            }
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::InvalidConfig("doc2vec lr0 must be positive".into()));
        }
        Ok(())
    }
}

/// Trained paragraph-vector model. Matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Doc2VecModel {
    pub config: Doc2VecConfig,
    pub vocab: BTreeMap<String, usize>,
    pub counts: Vec<u64>,
    /// `|V| x dim` input (context) word vectors.
    pub word_in: Vec<f64>,
    /// `|V| x dim` output vectors of the negative-sampling layer.
    pub word_out: Vec<f64>,
    /// `n_docs x dim` trained document vectors.
    pub doc_vecs: Vec<f64>,
    /// Cumulative `count^0.75` noise distribution.
    pub unigram_cdf: Vec<f64>,
    /// Mean loss per prediction, one entry per epoch.
    pub loss_history: Vec<f64>,
}

impl Doc2VecModel {
    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn vocab_len(&self) -> usize {
        self.counts.len()
    }

    pub fn n_docs(&self) -> usize {
        self.doc_vecs.len() / self.dim()
    }

    pub fn doc_vec(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.doc_vecs[i * d..(i + 1) * d]
    }

    pub fn word_vec(&self, word: &str) -> Option<&[f64]> {
        let d = self.dim();
        self.vocab.get(word).map(|&i| &self.word_in[i * d..(i + 1) * d])
    }

    fn encode(&self, doc: &TokenSeq) -> Vec<usize> {
        doc.iter().filter_map(|t| self.vocab.get(t).copied()).collect()
    }

    fn sample_noise(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.unigram_cdf.last().expect("non-empty vocabulary");
        let r = rng.gen::<f64>() * total;
        self.unigram_cdf
            .partition_point(|&c| c <= r)
            .min(self.unigram_cdf.len() - 1)
    }

    pub fn infer(&self, doc: &TokenSeq) -> Vec<f64> {
        d2v_infer(self, doc, self.config.infer_steps)
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-ln(sigmoid(x))`, computed without overflow.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Loss and `dL/d(score)` for each output word against hidden vector `h`.
/// Label `true` marks the centre word, `false` a noise word.
fn score_outputs(h: &[f64], outputs: &[&[f64]], labels: &[bool], coefs: &mut Vec<f64>) -> f64 {
    coefs.clear();
    let mut loss = 0.0;
    for (o, &positive) in outputs.iter().zip(labels) {
        let z: f64 = h.iter().zip(o.iter()).map(|(a, b)| a * b).sum();
        if positive {
            loss += neg_log_sigmoid(z);
            coefs.push(sigmoid(z) - 1.0);
        } else {
            loss += neg_log_sigmoid(-z);
            coefs.push(sigmoid(z));
        }
    }
    loss
}

fn mean_input(doc: &[f64], context: &[&[f64]], h: &mut [f64]) {
    h.copy_from_slice(doc);
    for c in context {
        for (a, b) in h.iter_mut().zip(c.iter()) {
            *a += b;
        }
    }
    let inv = 1.0 / (1 + context.len()) as f64;
    h.iter_mut().for_each(|a| *a *= inv);
}

/// Loss and exact gradients of one PV-DM negative-sampling prediction.
#[derive(Debug, Clone)]
pub struct PvDmLoss {
    pub loss: f64,
    /// Gradient with respect to the document vector.
    pub grad_doc: Vec<f64>,
    /// Gradient with respect to each context word vector (all identical).
    pub grad_context: Vec<f64>,
    /// Gradient with respect to each output vector, in input order.
    pub grad_outputs: Vec<Vec<f64>>,
}

/// Evaluates `-ln s(h.o+) - sum ln s(-h.o-)` where `h` is the mean of the
/// document vector and the context vectors.
pub fn negative_sampling_step(doc: &[f64], context: &[&[f64]], outputs: &[&[f64]], labels: &[bool]) -> PvDmLoss {
    let d = doc.len();
    let mut h = vec![0.0; d];
    mean_input(doc, context, &mut h);
    let mut coefs = Vec::new();
    let loss = score_outputs(&h, outputs, labels, &mut coefs);
    let mut grad_h = vec![0.0; d];
    for (c, o) in coefs.iter().zip(outputs) {
        for (g, x) in grad_h.iter_mut().zip(o.iter()) {
            *g += c * x;
        }
    }
    let inv = 1.0 / (1 + context.len()) as f64;
    let grad_in: Vec<f64> = grad_h.iter().map(|g| g * inv).collect();
    PvDmLoss {
        loss,
        grad_doc: grad_in.clone(),
        grad_context: grad_in,
        grad_outputs: coefs.iter().map(|c| h.iter().map(|x| c * x).collect()).collect(),
    }
}

fn init_uniform(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> Vec<f64> {
    let scale = 0.5 / dim as f64;
    (0..len).map(|_| rng.gen_range(-scale..scale)).collect()
}

fn fnv1a(doc: &TokenSeq) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for t in doc.iter() {
        for b in t.bytes().chain(std::iter::once(0u8)) {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
    }
    hash
}

/// Scratch buffers reused across SGD steps.
struct Scratch {
    h: Vec<f64>,
    grad_h: Vec<f64>,
    coefs: Vec<f64>,
    context: Vec<usize>,
    targets: Vec<usize>,
    labels: Vec<bool>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch {
            h: vec![0.0; dim],
            grad_h: vec![0.0; dim],
            coefs: Vec::new(),
            context: Vec::new(),
            targets: Vec::new(),
            labels: Vec::new(),
        }
    }
}

/// Forward and backward pass for the word at `pos`, leaving the hidden
/// vector, per-output coefficients and `dL/dh` in `scratch`. Returns the
/// prediction loss. Nothing is written to the model.
fn predict_word(
    model: &Doc2VecModel,
    doc_vec: &[f64],
    words: &[usize],
    pos: usize,
    rng: &mut ChaCha8Rng,
    scratch: &mut Scratch,
) -> f64 {
    let d = model.dim();
    let window = model.config.window;
    let lo = pos.saturating_sub(window);
    let hi = (pos + window + 1).min(words.len());
    scratch.context.clear();
    scratch.context.extend((lo..hi).filter(|&j| j != pos).map(|j| words[j]));

    let ctx: Vec<&[f64]> = scratch
        .context
        .iter()
        .map(|&w| &model.word_in[w * d..(w + 1) * d])
        .collect();
    mean_input(doc_vec, &ctx, &mut scratch.h);

    let target = words[pos];
    scratch.targets.clear();
    scratch.labels.clear();
    scratch.targets.push(target);
    scratch.labels.push(true);
    for _ in 0..model.config.negatives {
        let w = model.sample_noise(rng);
        if w != target {
            scratch.targets.push(w);
            scratch.labels.push(false);
        }
    }

    let outs: Vec<&[f64]> = scratch
        .targets
        .iter()
        .map(|&w| &model.word_out[w * d..(w + 1) * d])
        .collect();
    let loss = score_outputs(&scratch.h, &outs, &scratch.labels, &mut scratch.coefs);

    scratch.grad_h.iter_mut().for_each(|g| *g = 0.0);
    for (&c, o) in scratch.coefs.iter().zip(&outs) {
        for (g, x) in scratch.grad_h.iter_mut().zip(o.iter()) {
            *g += c * x;
        }
    }
    loss
}

/// Applies the gradients left in `scratch` to the document vector.
///
/// Input vectors take the full `dL/dh` rather than the exact share
/// `dL/dh / (1 + |context|)`, as in the usual mean-mode PV-DM trainers. With
/// the exact share the document vectors barely move from their initial
/// values within a practical number of epochs.
fn update_doc(doc_vec: &mut [f64], lr: f64, scratch: &Scratch) {
    for (v, g) in doc_vec.iter_mut().zip(&scratch.grad_h) {
        *v -= lr * g;
    }
}

/// Applies the gradients left in `scratch` to the output and context word
/// vectors.
fn update_words(model: &mut Doc2VecModel, lr: f64, scratch: &Scratch) {
    let d = model.dim();
    for (&c, &w) in scratch.coefs.iter().zip(&scratch.targets) {
        let o = &mut model.word_out[w * d..(w + 1) * d];
        for (x, hv) in o.iter_mut().zip(&scratch.h) {
            *x -= lr * c * hv;
        }
    }
    for &w in &scratch.context {
        let row = &mut model.word_in[w * d..(w + 1) * d];
        for (v, g) in row.iter_mut().zip(&scratch.grad_h) {
            *v -= lr * g;
        }
    }
}

/// Trains PV-DM on `corpus`. Single-threaded and bit-deterministic for a
/// given configuration.
pub fn d2v_train(corpus: &[TokenSeq], config: &Doc2VecConfig) -> Result<Doc2VecModel> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut raw_counts: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in corpus {
        for t in doc.iter() {
            *raw_counts.entry(t).or_insert(0) += 1;
        }
    }
    let mut vocab = BTreeMap::new();
    let mut counts = Vec::new();
    for (t, c) in raw_counts {
        if c >= config.min_count as u64 {
            vocab.insert(t.to_string(), counts.len());
            counts.push(c);
        }
    }
    if counts.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let d = config.dim;
    let mut unigram_cdf = Vec::with_capacity(counts.len());
    let mut acc = 0.0;
    for &c in &counts {
        acc += (c as f64).powf(0.75);
        unigram_cdf.push(acc);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let word_in = init_uniform(&mut rng, counts.len() * d, d);
    let doc_vecs = init_uniform(&mut rng, corpus.len() * d, d);
    let mut model = Doc2VecModel {
        config: config.clone(),
        vocab,
        word_out: vec![0.0; counts.len() * d],
        counts,
        word_in,
        doc_vecs,
        unigram_cdf,
        loss_history: Vec::with_capacity(config.epochs),
    };

    let encoded: Vec<Vec<usize>> = corpus.iter().map(|doc| model.encode(doc)).collect();
    let total = (config.epochs * corpus.len()) as f64;
    let min_lr = config.lr0 / 100.0;
    let mut scratch = Scratch::new(d);
    let mut doc_buf = vec![0.0; d];

    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        let mut predictions = 0usize;
        for (di, words) in encoded.iter().enumerate() {
            let progress = (epoch * corpus.len() + di) as f64 / total;
            let lr = config.lr0 - (config.lr0 - min_lr) * progress;
            doc_buf.copy_from_slice(&model.doc_vecs[di * d..(di + 1) * d]);
            for pos in 0..words.len() {
                epoch_loss += predict_word(&model, &doc_buf, words, pos, &mut rng, &mut scratch);
                update_doc(&mut doc_buf, lr, &scratch);
                update_words(&mut model, lr, &scratch);
                predictions += 1;
            }
            model.doc_vecs[di * d..(di + 1) * d].copy_from_slice(&doc_buf);
        }
        let mean = if predictions > 0 {
            epoch_loss / predictions as f64
        } else {
            0.0
        };
        if !mean.is_finite() {
            return Err(Error::DivergenceDetected { epoch });
        }
        log::debug!("doc2vec epoch {epoch}: mean loss {mean:.5}");
        model.loss_history.push(mean);
    }
    Ok(model)
}

/// Infers a vector for a document with the word matrices frozen.
///
/// The starting point and the noise samples are seeded from the model seed
/// and a hash of the tokens, so the result is a pure function of its inputs.
pub fn d2v_infer(model: &Doc2VecModel, doc: &TokenSeq, steps: usize) -> Vec<f64> {
    let d = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(model.config.seed ^ fnv1a(doc));
    let mut vec = init_uniform(&mut rng, d, d);
    let words = model.encode(doc);
    if words.is_empty() || steps == 0 {
        return vec;
    }
    let mut scratch = Scratch::new(d);
    let lr0 = model.config.lr0;
    let min_lr = lr0 / 100.0;
    for step in 0..steps {
        let lr = lr0 - (lr0 - min_lr) * step as f64 / steps as f64;
        for pos in 0..words.len() {
            predict_word(model, &vec, &words, pos, &mut rng, &mut scratch);
            update_doc(&mut vec, lr, &scratch);
        }
    }
    vec
}
