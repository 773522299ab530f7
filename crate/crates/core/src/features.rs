//! Feature sets and the fitted text-to-row transforms behind them.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lingfeat::{extract, FeatureScaler};
use crate::matrix::{FeatureMatrix, Row};
use crate::vectorize::{d2v_train, tfidf_fit, tokenize, Doc2VecConfig, Doc2VecModel, TfidfModel, TokenSeq};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureSet {
    Readability,
    CountPunct,
    SentimentScore,
    CountWord,
    AllFeatures,
    Tfidf,
    Doc2Vec,
}

impl FeatureSet {
    /// Report row order.
    pub const ALL: [FeatureSet; 7] = [
        FeatureSet::Readability,
        FeatureSet::CountPunct,
        FeatureSet::SentimentScore,
        FeatureSet::CountWord,
        FeatureSet::AllFeatures,
        FeatureSet::Tfidf,
        FeatureSet::Doc2Vec,
    ];

    /// Row label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            FeatureSet::Readability => "Readability",
            FeatureSet::CountPunct => "CountPunct",
            FeatureSet::SentimentScore => "SentimentScore",
            FeatureSet::CountWord => "CountWord",
            FeatureSet::AllFeatures => "All Features",
            FeatureSet::Tfidf => "TFIDF",
            FeatureSet::Doc2Vec => "Doc2Vec",
        }
    }

    /// Short lowercase key used on the command line and in CSV output.
    pub fn key(self) -> &'static str {
        match self {
            FeatureSet::Readability => "readability",
            FeatureSet::CountPunct => "countpunct",
            FeatureSet::SentimentScore => "sentimentscore",
            FeatureSet::CountWord => "countword",
            FeatureSet::AllFeatures => "allfeatures",
            FeatureSet::Tfidf => "tfidf",
            FeatureSet::Doc2Vec => "doc2vec",
        }
    }

    /// Linguistic columns used, if this is a linguistic set.
    pub fn linguistic_columns(self) -> Option<Vec<usize>> {
        match self {
            FeatureSet::Readability => Some(vec![0]),
            FeatureSet::CountPunct => Some(vec![1]),
            FeatureSet::SentimentScore => Some(vec![2]),
            FeatureSet::CountWord => Some(vec![3]),
            FeatureSet::AllFeatures => Some(vec![0, 1, 2, 3]),
            FeatureSet::Tfidf | FeatureSet::Doc2Vec => None,
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "readability" => Ok(FeatureSet::Readability),
            "countpunct" | "countpunc" | "punct" => Ok(FeatureSet::CountPunct),
            "sentimentscore" | "sentiment" => Ok(FeatureSet::SentimentScore),
            "countword" | "words" => Ok(FeatureSet::CountWord),
            "allfeatures" | "all" => Ok(FeatureSet::AllFeatures),
            "tfidf" => Ok(FeatureSet::Tfidf),
            "doc2vec" | "d2v" => Ok(FeatureSet::Doc2Vec),
            _ => Err(Error::InvalidConfig(format!("unknown feature set {s:?}"))),
        }
    }
}

/// A fitted transform from statement text to a model-ready row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Featurizer {
    /// Selected linguistic features, standardised with training statistics.
    Linguistic {
        set: FeatureSet,
        columns: Vec<usize>,
        scaler: FeatureScaler,
    },
    Tfidf {
        model: TfidfModel,
    },
    /// Training rows use the trained paragraph vectors; unseen text is
    /// embedded by inference.
    Doc2Vec {
        model: Doc2VecModel,
    },
}

fn linguistic_rows(texts: &[&str], columns: &[usize]) -> Vec<Vec<f64>> {
    texts
        .par_iter()
        .map(|t| {
            let all = extract(t).to_array();
            columns.iter().map(|&c| all[c]).collect()
        })
        .collect()
}

impl Featurizer {
    /// Fits the transform for `set` on `texts` and returns it together with
    /// the transformed training matrix. `seed` drives Doc2Vec training.
    pub fn fit(set: FeatureSet, texts: &[&str], d2v: &Doc2VecConfig, seed: u64) -> Result<(Self, FeatureMatrix)> {
        if let Some(columns) = set.linguistic_columns() {
            let raw = linguistic_rows(texts, &columns);
            let scaler = FeatureScaler::fit(&raw)?;
            let rows = raw.iter().map(|r| scaler.apply(r)).collect::<Result<Vec<_>>>()?;
            let featurizer = Featurizer::Linguistic { set, columns, scaler };
            return Ok((featurizer, FeatureMatrix::dense(rows)?));
        }
        let corpus: Vec<TokenSeq> = texts.par_iter().map(|t| tokenize(t)).collect();
        match set {
            FeatureSet::Tfidf => {
                let model = tfidf_fit(&corpus)?;
                let rows = corpus.par_iter().map(|d| model.transform(d)).collect();
                let dim = model.dim();
                Ok((Featurizer::Tfidf { model }, FeatureMatrix::sparse(rows, dim)?))
            }
            FeatureSet::Doc2Vec => {
                let model = d2v_train(&corpus, &Doc2VecConfig { seed, ..d2v.clone() })?;
                let rows = (0..model.n_docs()).map(|i| model.doc_vec(i).to_vec()).collect();
                Ok((Featurizer::Doc2Vec { model }, FeatureMatrix::dense(rows)?))
            }
            _ => unreachable!("linguistic sets handled above"),
        }
    }

    pub fn feature_set(&self) -> FeatureSet {
        match self {
            Featurizer::Linguistic { set, .. } => *set,
            Featurizer::Tfidf { .. } => FeatureSet::Tfidf,
            Featurizer::Doc2Vec { .. } => FeatureSet::Doc2Vec,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Featurizer::Linguistic { columns, .. } => columns.len(),
            Featurizer::Tfidf { model } => model.dim(),
            Featurizer::Doc2Vec { model } => model.dim(),
        }
    }

    pub fn transform(&self, text: &str) -> Result<Row> {
        Ok(match self {
            Featurizer::Linguistic { columns, scaler, .. } => {
                let all = extract(text).to_array();
                let raw: Vec<f64> = columns.iter().map(|&c| all[c]).collect();
                Row::Dense(scaler.apply(&raw)?)
            }
            Featurizer::Tfidf { model } => Row::Sparse(model.transform(&tokenize(text))),
            Featurizer::Doc2Vec { model } => Row::Dense(model.infer(&tokenize(text))),
        })
    }

    /// Transforms many texts; rows are computed in parallel but the result
    /// does not depend on scheduling.
    pub fn transform_all(&self, texts: &[&str]) -> Result<FeatureMatrix> {
        let rows = texts
            .par_iter()
            .map(|t| self.transform(t))
            .collect::<Result<Vec<_>>>()?;
        match self {
            Featurizer::Tfidf { model } => FeatureMatrix::sparse(
                rows.into_iter()
                    .map(|r| match r {
                        Row::Sparse(s) => s,
                        Row::Dense(_) => unreachable!("tfidf rows are sparse"),
                    })
                    .collect(),
                model.dim(),
            ),
            _ => FeatureMatrix::from_rows(rows),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXTS: [&str; 4] = [
        "Says the Annies List political group supports third-trimester abortions on demand.",
        "The economy is good, and jobs are up!",
        "Crime has never been this bad.",
        "We cut taxes; we did not raise them?",
    ];

    #[test]
    fn parse_and_labels() {
        for set in FeatureSet::ALL {
            assert_eq!(set.key().parse::<FeatureSet>().unwrap(), set);
            assert_eq!(set.label().parse::<FeatureSet>().unwrap(), set);
        }
        assert!("ngram".parse::<FeatureSet>().is_err());
    }

    #[test]
    fn single_feature_is_one_column() {
        let (f, x) = Featurizer::fit(FeatureSet::CountPunct, &TEXTS, &Doc2VecConfig::default(), 0).unwrap();
        assert_eq!(x.dim(), 1);
        assert_eq!(f.dim(), 1);
        assert_eq!(x.n_rows(), 4);
        // Training rows come from the same transform as unseen text.
        assert_eq!(f.transform(TEXTS[2]).unwrap(), x.row(2).to_row());
    }

    #[test]
    fn all_features_are_standardised() {
        let (_, x) = Featurizer::fit(FeatureSet::AllFeatures, &TEXTS, &Doc2VecConfig::default(), 0).unwrap();
        assert_eq!(x.dim(), 4);
        for c in 0..4 {
            let mean: f64 = x.rows().map(|r| r.get(c)).sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-9);
        }
    }

    #[test]
    fn tfidf_rows_match_transform() {
        let (f, x) = Featurizer::fit(FeatureSet::Tfidf, &TEXTS, &Doc2VecConfig::default(), 0).unwrap();
        assert!(x.is_sparse());
        let again = f.transform_all(&TEXTS).unwrap();
        assert_eq!(again, x);
    }

    #[test]
    fn doc2vec_shapes() {
        let cfg = Doc2VecConfig {
            dim: 8,
            epochs: 3,
            ..Doc2VecConfig::default()
        };
        let (f, x) = Featurizer::fit(FeatureSet::Doc2Vec, &TEXTS, &cfg, 5).unwrap();
        assert_eq!((x.n_rows(), x.dim()), (4, 8));
        assert_eq!(f.transform("unseen words entirely").unwrap().dim(), 8);
    }
}
