//! Logistic regression by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use super::{sigmoid, Dataset, LinearModel};
use crate::matrix::FeatureMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Full-batch descent draws no randomness; kept for a uniform interface.
    pub seed: u64,
    /// Replace `lr` by `1 / L`, where `L` bounds the curvature of the
    /// objective (estimated by power iteration). Descent is then monotone
    /// regardless of feature scale.
    pub auto_step: bool,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            lr: 0.1,
            epochs: 200,
            l2: 1e-4,
            seed: 0,
            auto_step: false,
        }
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean log loss plus `l2/2 |w|^2` (the bias is not penalised).
pub fn logreg_objective(model: &LinearModel, data: &Dataset, l2: f64) -> f64 {
    let n = data.len() as f64;
    let data_loss: f64 = data
        .x
        .rows()
        .zip(&data.y)
        .map(|(x, y)| {
            let z = model.decision(x);
            softplus(z) - y.as_f64() * z
        })
        .sum();
    let reg: f64 = model.weights.iter().map(|w| w * w).sum();
    data_loss / n + 0.5 * l2 * reg
}

/// Gradient of [`logreg_objective`]: `(dw, db)`.
pub fn logreg_gradient(model: &LinearModel, data: &Dataset, l2: f64) -> (Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut gw: Vec<f64> = model.weights.iter().map(|w| l2 * w).collect();
    let mut gb = 0.0;
    for (x, y) in data.x.rows().zip(&data.y) {
        let r = (sigmoid(model.decision(x)) - y.as_f64()) / n;
        x.axpy_into(r, &mut gw);
        gb += r;
    }
    (gw, gb)
}

/// Largest eigenvalue of `[X 1]^T [X 1] / n` by power iteration.
fn gram_spectral_radius(x: &FeatureMatrix) -> f64 {
    let dim = x.dim();
    let n = x.n_rows() as f64;
    let mut v = vec![1.0; dim + 1];
    let mut lambda = 0.0;
    for _ in 0..50 {
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        let mut next = vec![0.0; dim + 1];
        for row in x.rows() {
            let xv = row.dot(&v[..dim]) + v[dim];
            row.axpy_into(xv / n, &mut next[..dim]);
            next[dim] += xv / n;
        }
        lambda = next.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        v = next;
    }
    lambda
}

pub fn logreg_fit(data: &Dataset, config: &LogRegConfig) -> Result<LinearModel> {
    if !(config.l2 >= 0.0 && config.l2.is_finite()) {
        return Err(Error::InvalidConfig("logreg l2 must be non-negative".into()));
    }
    data.check(true)?;
    let lr = if config.auto_step {
        // Power iteration approaches the top eigenvalue from below; the 1.5
        // margin keeps the step inside the monotone region (< 2 / L).
        let curvature = 0.25 * gram_spectral_radius(&data.x) * 1.5 + config.l2;
        1.0 / curvature.max(1e-12)
    } else {
        config.lr
    };
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::InvalidConfig("logreg lr must be positive".into()));
    }

    let mut model = LinearModel::zeros(data.dim());
    model.loss_history.push(logreg_objective(&model, data, config.l2));
    for epoch in 0..config.epochs {
        let (gw, gb) = logreg_gradient(&model, data, config.l2);
        model.weights.iter_mut().zip(&gw).for_each(|(w, g)| *w -= lr * g);
        model.bias -= lr * gb;
        let loss = logreg_objective(&model, data, config.l2);
        if !loss.is_finite() {
            return Err(Error::DivergenceDetected { epoch });
        }
        model.loss_history.push(loss);
    }
    Ok(model)
}
