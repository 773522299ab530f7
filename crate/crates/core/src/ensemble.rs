//! Hold-out stacking: four base classifiers fitted on one portion of the
//! training data feed their scores on the other portion to an ANN
//! meta-learner.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{predict_vector, BaseClassifier, ClassicalConfig, Classifier, Dataset, ModelKind};
use crate::dataset::{stack_split, BinaryLabel, StackSplit, Statement, DEFAULT_STACK_RATIO};
use crate::features::{FeatureSet, Featurizer};
use crate::matrix::{FeatureMatrix, RowRef};
use crate::neural::{ann_init, ann_train, AnnConfig, AnnModel};
use crate::vectorize::Doc2VecConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HybridVariant {
    /// Linguistic-feature bases; the meta input also carries the scaled
    /// linguistic features.
    V1,
    /// Linguistic-feature bases, prediction vector only.
    V2,
    /// TFIDF bases.
    V3,
    /// Doc2Vec bases.
    V4,
}

impl HybridVariant {
    pub const ALL: [HybridVariant; 4] = [
        HybridVariant::V1,
        HybridVariant::V2,
        HybridVariant::V3,
        HybridVariant::V4,
    ];

    pub fn label(self) -> &'static str {
        match self {
            HybridVariant::V1 => "Hybrid V1",
            HybridVariant::V2 => "Hybrid V2",
            HybridVariant::V3 => "Hybrid V3",
            HybridVariant::V4 => "Hybrid V4",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            HybridVariant::V1 => "v1",
            HybridVariant::V2 => "v2",
            HybridVariant::V3 => "v3",
            HybridVariant::V4 => "v4",
        }
    }

    /// Features the base models are trained on.
    pub fn base_features(self) -> FeatureSet {
        match self {
            HybridVariant::V1 | HybridVariant::V2 => FeatureSet::AllFeatures,
            HybridVariant::V3 => FeatureSet::Tfidf,
            HybridVariant::V4 => FeatureSet::Doc2Vec,
        }
    }

    pub fn with_linguistic(self) -> bool {
        self == HybridVariant::V1
    }

    /// Width of the meta-learner input.
    pub fn meta_dim(self) -> usize {
        4 + 4 * usize::from(self.with_linguistic())
    }
}

impl fmt::Display for HybridVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for HybridVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.trim_start_matches("hybrid") {
            "v1" => Ok(HybridVariant::V1),
            "v2" => Ok(HybridVariant::V2),
            "v3" => Ok(HybridVariant::V3),
            "v4" => Ok(HybridVariant::V4),
            _ => Err(Error::InvalidConfig(format!("unknown hybrid variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    /// Fraction of the training set used to fit the base models.
    pub ratio: f64,
    pub classical: ClassicalConfig,
    pub doc2vec: Doc2VecConfig,
    /// Meta-learner settings; `input_dim` is overwritten from the variant.
    pub meta: AnnConfig,
    /// Feed thresholded 0/1 base predictions instead of scores.
    pub hard_labels: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            ratio: DEFAULT_STACK_RATIO,
            classical: ClassicalConfig::default(),
            doc2vec: Doc2VecConfig::default(),
            meta: AnnConfig::default(),
            hard_labels: false,
        }
    }
}

/// First-level models as seen by the meta-learner.
pub trait BaseLayer {
    /// One row per text: the four base scores in [`ModelKind::ALL`] order,
    /// followed by the scaled linguistic features when `with_linguistic`.
    fn stack_inputs(&self, texts: &[&str], with_linguistic: bool) -> Result<Vec<Vec<f64>>>;
}

/// A featurizer and the four classical models trained on its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedBases {
    pub featurizer: Featurizer,
    pub models: [BaseClassifier; 4],
}

/// Fits `features` and all four base models on `statements`. The models are
/// fitted concurrently; each receives the same `seed`.
pub fn fit_bases(
    statements: &[Statement],
    features: FeatureSet,
    config: &EnsembleConfig,
    seed: u64,
) -> Result<FittedBases> {
    let texts: Vec<&str> = statements.iter().map(|s| s.text.as_str()).collect();
    let (featurizer, x) = Featurizer::fit(features, &texts, &config.doc2vec, seed)?;
    let data = Dataset::new(x, statements.iter().map(|s| s.binary_label).collect())?;
    let models: Vec<BaseClassifier> = ModelKind::ALL
        .par_iter()
        .map(|&k| BaseClassifier::fit(k, &data, &config.classical, seed))
        .collect::<Result<_>>()?;
    let models: [BaseClassifier; 4] = models.try_into().expect("four model kinds");
    Ok(FittedBases { featurizer, models })
}

impl BaseLayer for FittedBases {
    fn stack_inputs(&self, texts: &[&str], with_linguistic: bool) -> Result<Vec<Vec<f64>>> {
        if with_linguistic && self.featurizer.feature_set() != FeatureSet::AllFeatures {
            return Err(Error::InvalidConfig(
                "linguistic meta inputs need bases trained on all linguistic features".into(),
            ));
        }
        let x = self.featurizer.transform_all(texts)?;
        x.rows()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&row| {
                let mut v = predict_vector(&self.models, row)?.0.to_vec();
                if with_linguistic {
                    v.extend((0..row.dim()).map(|j| row.get(j)));
                }
                Ok(v)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackingEnsemble<B = FittedBases> {
    pub variant: HybridVariant,
    pub bases: B,
    pub meta: AnnModel,
    pub split_seed: u64,
    pub hard_labels: bool,
}

/// Splits `train`, fits the variant's featurizer and base models on the base
/// portion, then trains the meta-learner on the held-out portion.
pub fn build_hybrid(
    train: &[Statement],
    variant: HybridVariant,
    config: &EnsembleConfig,
    seed: u64,
) -> Result<StackingEnsemble<FittedBases>> {
    let split = stack_split(train, config.ratio, seed)?;
    let bases = fit_bases(&split.base_portion, variant.base_features(), config, seed)?;
    build_hybrid_with(&split, variant, &config.meta, config.hard_labels, bases)
}

/// Trains the meta-learner over already fitted `bases`. Only the meta
/// portion of `split` is read.
pub fn build_hybrid_with<B: BaseLayer>(
    split: &StackSplit,
    variant: HybridVariant,
    meta_config: &AnnConfig,
    hard_labels: bool,
    bases: B,
) -> Result<StackingEnsemble<B>> {
    let inputs = meta_inputs(&bases, &split.meta_portion, variant, hard_labels)?;
    let labels: Vec<BinaryLabel> = split.meta_portion.iter().map(|s| s.binary_label).collect();
    let data = Dataset::new(FeatureMatrix::dense(inputs)?, labels)?;
    let config = AnnConfig {
        input_dim: variant.meta_dim(),
        seed: split.seed,
        ..meta_config.clone()
    };
    let meta = ann_train(ann_init(&config)?, &data, None)?;
    Ok(StackingEnsemble {
        variant,
        bases,
        meta,
        split_seed: split.seed,
        hard_labels,
    })
}

/// Meta-learner inputs for `statements`, checked against the variant's
/// width.
pub fn meta_inputs<B: BaseLayer>(
    bases: &B,
    statements: &[Statement],
    variant: HybridVariant,
    hard_labels: bool,
) -> Result<Vec<Vec<f64>>> {
    let texts: Vec<&str> = statements.iter().map(|s| s.text.as_str()).collect();
    texts_to_inputs(bases, &texts, variant, hard_labels)
}

fn texts_to_inputs<B: BaseLayer>(
    bases: &B,
    texts: &[&str],
    variant: HybridVariant,
    hard_labels: bool,
) -> Result<Vec<Vec<f64>>> {
    let mut rows = bases.stack_inputs(texts, variant.with_linguistic())?;
    for row in &mut rows {
        if row.len() != variant.meta_dim() {
            return Err(Error::DimensionMismatch {
                expected: variant.meta_dim(),
                got: row.len(),
            });
        }
        if hard_labels {
            row[..4]
                .iter_mut()
                .for_each(|s| *s = BinaryLabel::from_score(*s).as_f64());
        }
    }
    Ok(rows)
}

impl<B: BaseLayer> StackingEnsemble<B> {
    pub fn score_texts(&self, texts: &[&str]) -> Result<Vec<f64>> {
        texts_to_inputs(&self.bases, texts, self.variant, self.hard_labels)?
            .iter()
            .map(|row| self.meta.score(RowRef::Dense(row)))
            .collect()
    }

    pub fn score(&self, text: &str) -> Result<f64> {
        Ok(self.score_texts(&[text])?[0])
    }

    pub fn predict(&self, text: &str) -> Result<BinaryLabel> {
        Ok(BinaryLabel::from_score(self.score(text)?))
    }
}

pub fn hybrid_score<B: BaseLayer>(ensemble: &StackingEnsemble<B>, statement: &Statement) -> Result<f64> {
    ensemble.score(&statement.text)
}

pub fn hybrid_predict<B: BaseLayer>(ensemble: &StackingEnsemble<B>, statement: &Statement) -> Result<BinaryLabel> {
    ensemble.predict(&statement.text)
}

/// Fraction of `eval_set` classified correctly.
pub fn evaluate_hybrid<B: BaseLayer>(ensemble: &StackingEnsemble<B>, eval_set: &[Statement]) -> Result<f64> {
    if eval_set.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    let texts: Vec<&str> = eval_set.iter().map(|s| s.text.as_str()).collect();
    let scores = ensemble.score_texts(&texts)?;
    let correct = scores
        .iter()
        .zip(eval_set)
        .filter(|(s, st)| BinaryLabel::from_score(**s) == st.binary_label)
        .count();
    Ok(correct as f64 / eval_set.len() as f64)
}
