//! Linear SVM trained by SGD on the L2-regularised hinge loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, LinearModel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 1e-4,
            epochs: 50,
            seed: 0,
        }
    }
}

/// `lambda/2 |w|^2 + mean(max(0, 1 - y (w.x + b)))` with `y` in {-1, +1}.
pub fn svm_objective(model: &LinearModel, data: &Dataset, lambda: f64) -> f64 {
    let y = data.signed_labels();
    let hinge: f64 = data
        .x
        .rows()
        .zip(&y)
        .map(|(x, yi)| (1.0 - yi * model.decision(x)).max(0.0))
        .sum();
    let reg: f64 = model.weights.iter().map(|w| w * w).sum();
    0.5 * lambda * reg + hinge / data.len() as f64
}

/// Subgradient of [`svm_objective`]: `(dw, db)`. Points exactly on the
/// margin contribute nothing.
pub fn svm_gradient(model: &LinearModel, data: &Dataset, lambda: f64) -> (Vec<f64>, f64) {
    let y = data.signed_labels();
    let n = data.len() as f64;
    let mut gw: Vec<f64> = model.weights.iter().map(|w| lambda * w).collect();
    let mut gb = 0.0;
    for (x, yi) in data.x.rows().zip(&y) {
        if yi * model.decision(x) < 1.0 {
            x.axpy_into(-yi / n, &mut gw);
            gb -= yi / n;
        }
    }
    (gw, gb)
}

/// Per-sample SGD with step `1 / (lambda (t0 + t))`.
///
/// `t0` follows the usual heuristic for this schedule: the first step is
/// `sqrt(1 / sqrt(lambda))`, the typical weight scale. Weight decay is kept in
/// a separate scale factor so sparse rows cost only their non-zeros.
pub fn svm_fit(data: &Dataset, config: &SvmConfig) -> Result<LinearModel> {
    if !(config.lambda > 0.0 && config.lambda.is_finite()) {
        return Err(Error::InvalidConfig("svm lambda must be positive".into()));
    }
    data.check(true)?;
    let lambda = config.lambda;
    let y = data.signed_labels();
    let dim = data.dim();

    let typical = (1.0 / lambda.sqrt()).sqrt();
    let t0 = 1.0 / (typical * lambda);

    let mut v = vec![0.0; dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0;
    let mut t = 0.0f64;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut model = LinearModel::zeros(dim);
    model.loss_history.push(svm_objective(&model, data, lambda));

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = 1.0 / (lambda * (t0 + t));
            t += 1.0;
            let x = data.x.row(i);
            let margin = y[i] * (scale * x.dot(&v) + bias);
            scale *= 1.0 - eta * lambda;
            if margin < 1.0 {
                x.axpy_into(eta * y[i] / scale, &mut v);
                bias += eta * y[i];
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
        model.weights.iter_mut().zip(&v).for_each(|(w, vi)| *w = scale * vi);
        model.bias = bias;
        let loss = svm_objective(&model, data, lambda);
        if !loss.is_finite() {
            return Err(Error::DivergenceDetected { epoch });
        }
        model.loss_history.push(loss);
    }
    Ok(model)
}
