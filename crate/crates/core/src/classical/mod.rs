//! The four base classifiers behind one fit / score / predict contract.
//!
//! Every classifier emits a positive-class score in [0, 1] and predicts TRUE
//! exactly when that score is at least 0.5.

mod forest;
mod knn;
mod logreg;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::BinaryLabel;
use crate::matrix::{FeatureMatrix, RowRef};
use crate::{Error, Result};

pub use forest::{rf_fit, DecisionTree, ForestConfig, RandomForest, TreeNode};
pub use knn::{knn_fit, KnnConfig, KnnModel, Metric};
pub use logreg::{logreg_fit, logreg_gradient, logreg_objective, LogRegConfig};
pub use svm::{svm_fit, svm_gradient, svm_objective, SvmConfig};

/// Labelled training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: FeatureMatrix,
    pub y: Vec<BinaryLabel>,
}

impl Dataset {
    pub fn new(x: FeatureMatrix, y: Vec<BinaryLabel>) -> Result<Self> {
        if x.n_rows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.n_rows(),
                got: y.len(),
            });
        }
        Ok(Dataset { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn positives(&self) -> usize {
        self.y.iter().filter(|&&l| l == BinaryLabel::True).count()
    }

    /// Enforces `n >= 1`, finite features and, when `need_both`, both classes.
    pub(crate) fn check(&self, need_both: bool) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if !self.x.all_finite() {
            return Err(Error::InvalidConfig("feature matrix contains non-finite values".into()));
        }
        if need_both {
            let p = self.positives();
            if p == 0 || p == self.len() {
                return Err(Error::SingleClassData);
            }
        }
        Ok(())
    }

    /// Labels as `+1` (TRUE) / `-1` (FAKE).
    pub(crate) fn signed_labels(&self) -> Vec<f64> {
        self.y
            .iter()
            .map(|l| if *l == BinaryLabel::True { 1.0 } else { -1.0 })
            .collect()
    }
}

pub trait Classifier {
    fn input_dim(&self) -> usize;

    /// Positive-class score in [0, 1].
    fn score(&self, x: RowRef<'_>) -> Result<f64>;

    fn predict(&self, x: RowRef<'_>) -> Result<BinaryLabel> {
        Ok(BinaryLabel::from_score(self.score(x)?))
    }
}

/// Fraction of rows whose prediction matches the label.
pub fn accuracy<C: Classifier + ?Sized>(model: &C, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    let mut correct = 0usize;
    for (row, label) in data.x.rows().zip(&data.y) {
        if model.predict(row)? == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Weights and bias shared by the SVM and logistic regression; the score is
/// `sigmoid(w.x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Training objective recorded during fitting.
    pub loss_history: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        LinearModel {
            weights: vec![0.0; dim],
            bias: 0.0,
            loss_history: Vec::new(),
        }
    }

    pub fn decision(&self, x: RowRef<'_>) -> f64 {
        x.dot(&self.weights) + self.bias
    }
}

impl Classifier for LinearModel {
    fn input_dim(&self) -> usize {
        self.weights.len()
    }

    fn score(&self, x: RowRef<'_>) -> Result<f64> {
        x.check_dim(self.input_dim())?;
        Ok(sigmoid(self.decision(x)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    Svm,
    Knn,
    LogReg,
    RandomForest,
}

impl ModelKind {
    /// Prediction-vector order.
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Svm,
        ModelKind::Knn,
        ModelKind::LogReg,
        ModelKind::RandomForest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::Knn => "knn",
            ModelKind::LogReg => "logreg",
            ModelKind::RandomForest => "rf",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svm" => Ok(ModelKind::Svm),
            "knn" => Ok(ModelKind::Knn),
            "logreg" | "lr" | "logistic" => Ok(ModelKind::LogReg),
            "rf" | "random_forest" | "randomforest" | "forest" => Ok(ModelKind::RandomForest),
            other => Err(Error::InvalidConfig(format!("unknown classical model {other:?}"))),
        }
    }
}

/// Hyperparameters of all four base models.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassicalConfig {
    pub svm: SvmConfig,
    pub knn: KnnConfig,
    pub logreg: LogRegConfig,
    pub forest: ForestConfig,
}

/// A fitted base classifier of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum BaseClassifier {
    Svm(LinearModel),
    Knn(KnnModel),
    LogReg(LinearModel),
    RandomForest(RandomForest),
}

impl BaseClassifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            BaseClassifier::Svm(_) => ModelKind::Svm,
            BaseClassifier::Knn(_) => ModelKind::Knn,
            BaseClassifier::LogReg(_) => ModelKind::LogReg,
            BaseClassifier::RandomForest(_) => ModelKind::RandomForest,
        }
    }

    /// Fits `kind` on `data`; `seed` replaces the seed in `config`.
    pub fn fit(kind: ModelKind, data: &Dataset, config: &ClassicalConfig, seed: u64) -> Result<Self> {
        Ok(match kind {
            ModelKind::Svm => BaseClassifier::Svm(svm_fit(
                data,
                &SvmConfig {
                    seed,
                    ..config.svm.clone()
                },
            )?),
            ModelKind::Knn => BaseClassifier::Knn(knn_fit(data, &config.knn)?),
            ModelKind::LogReg => BaseClassifier::LogReg(logreg_fit(
                data,
                &LogRegConfig {
                    seed,
                    ..config.logreg.clone()
                },
            )?),
            ModelKind::RandomForest => BaseClassifier::RandomForest(rf_fit(
                data,
                &ForestConfig {
                    seed,
                    ..config.forest.clone()
                },
            )?),
        })
    }

    fn inner(&self) -> &dyn Classifier {
        match self {
            BaseClassifier::Svm(m) | BaseClassifier::LogReg(m) => m,
            BaseClassifier::Knn(m) => m,
            BaseClassifier::RandomForest(m) => m,
        }
    }
}

impl Classifier for BaseClassifier {
    fn input_dim(&self) -> usize {
        self.inner().input_dim()
    }

    fn score(&self, x: RowRef<'_>) -> Result<f64> {
        self.inner().score(x)
    }
}

/// Base-model scores in the fixed order SVM, KNN, LOGREG, RANDOM_FOREST.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionVector(pub [f64; 4]);

impl PredictionVector {
    pub fn scores(&self) -> &[f64; 4] {
        &self.0
    }
}

/// Scores `x` with each of the four models. `models` must be in
/// [`ModelKind::ALL`] order.
pub fn predict_vector(models: &[BaseClassifier; 4], x: RowRef<'_>) -> Result<PredictionVector> {
    let mut out = [0.0; 4];
    for (slot, (model, kind)) in out.iter_mut().zip(models.iter().zip(ModelKind::ALL)) {
        if model.kind() != kind {
            return Err(Error::InvalidConfig(format!(
                "prediction vector slot expects {kind}, found {}",
                model.kind()
            )));
        }
        *slot = model.score(x)?;
    }
    Ok(PredictionVector(out))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::matrix::FeatureMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn dense_data(rows: Vec<Vec<f64>>, labels: &[u8]) -> Dataset {
        Dataset::new(
            FeatureMatrix::dense(rows).unwrap(),
            labels.iter().map(|&l| BinaryLabel::from_bool(l == 1)).collect(),
        )
        .unwrap()
    }

    fn fit_all(data: &Dataset, config: &ClassicalConfig) -> [BaseClassifier; 4] {
        ModelKind::ALL.map(|k| BaseClassifier::fit(k, data, config, 3).unwrap())
    }

    fn noisy_blobs(seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let l = (i % 2) as u8;
            let c = if l == 1 { 0.7 } else { -0.7 };
            rows.push(vec![c + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            labels.push(l);
        }
        dense_data(rows, &labels)
    }

    #[test]
    fn prediction_vector_is_per_model() {
        // SVM and LOGREG see a linear trend; KNN with k = 1 memorises the one
        // point that goes against it.
        let data = dense_data(
            [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 4.0, 2.5]
                .iter()
                .map(|&v| vec![v, 0.0])
                .collect(),
            &[0, 0, 0, 1, 1, 1, 1, 0],
        );
        let mut config = ClassicalConfig::default();
        config.knn.k = 1;
        let models = fit_all(&data, &config);
        let x = [2.5, 0.0];
        let v = predict_vector(&models, RowRef::Dense(&x)).unwrap();
        for (got, m) in v.0.iter().zip(&models) {
            assert_eq!(*got, m.score(RowRef::Dense(&x)).unwrap());
            assert!((0.0..=1.0).contains(got));
        }
        assert_eq!(v.0[1], 0.0);
        assert!(v.0[0] > 0.5 && v.0[2] > 0.5);
    }

    #[test]
    fn degenerate_models_agree_on_majority() {
        // Constant features carry no signal; every model falls back to the
        // majority class.
        let rows = vec![vec![0.0]; 10];
        let data = dense_data(rows, &[1, 1, 1, 1, 1, 1, 0, 0, 0, 0]);
        let mut config = ClassicalConfig::default();
        config.knn.k = 10;
        let models = fit_all(&data, &config);
        let x = [0.0];
        let preds: Vec<_> = models.iter().map(|m| m.predict(RowRef::Dense(&x)).unwrap()).collect();
        assert!(preds.iter().all(|&p| p == BinaryLabel::True));
    }

    #[test]
    fn dimension_mismatch() {
        let data = noisy_blobs(1, 20);
        let models = fit_all(&data, &ClassicalConfig::default());
        assert!(matches!(
            predict_vector(&models, RowRef::Dense(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn model_kind_parse() {
        assert_eq!("SVM".parse::<ModelKind>().unwrap(), ModelKind::Svm);
        assert_eq!("rf".parse::<ModelKind>().unwrap(), ModelKind::RandomForest);
        assert!("ann".parse::<ModelKind>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn predict_matches_thresholded_score(seed in any::<u64>(), queries in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..20)) {
            let data = noisy_blobs(seed, 30);
            let models = fit_all(&data, &ClassicalConfig { forest: ForestConfig { n_trees: 8, ..ForestConfig::default() }, ..ClassicalConfig::default() });
            for (a, b) in queries {
                let x = [a, b];
                for m in &models {
                    let s = m.score(RowRef::Dense(&x)).unwrap();
                    prop_assert!((0.0..=1.0).contains(&s));
                    prop_assert_eq!(m.predict(RowRef::Dense(&x)).unwrap(), BinaryLabel::from_bool(s >= 0.5));
                }
            }
        }
    }
}
