use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::RunConfig;
use crate::classical::{accuracy, BaseClassifier, Dataset, ModelKind};
use crate::dataset::{class_counts, SplitSet, Statement};
use crate::ensemble::{build_hybrid, evaluate_hybrid, HybridVariant};
use crate::features::{FeatureSet, Featurizer};
use crate::matrix::FeatureMatrix;
use crate::neural::{ann_init, ann_train, AnnConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellModel {
    Classical(ModelKind),
    Ann,
}

impl CellModel {
    pub fn key(self) -> &'static str {
        match self {
            CellModel::Classical(k) => k.as_str(),
            CellModel::Ann => "ann",
        }
    }
}

impl FromStr for CellModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("ann") {
            Ok(CellModel::Ann)
        } else {
            s.parse().map(CellModel::Classical)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellFeatures {
    Set(FeatureSet),
    Hybrid(HybridVariant),
}

impl CellFeatures {
    pub fn key(self) -> &'static str {
        match self {
            CellFeatures::Set(f) => f.key(),
            CellFeatures::Hybrid(v) => v.key(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CellFeatures::Set(f) => f.label(),
            CellFeatures::Hybrid(v) => v.label(),
        }
    }
}

impl FromStr for CellFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<HybridVariant>()
            .map(CellFeatures::Hybrid)
            .or_else(|_| s.parse().map(CellFeatures::Set))
    }
}

/// One grid position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellSpec {
    pub model: CellModel,
    pub features: CellFeatures,
}

impl fmt::Display for CellSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.model.key(), self.features.key())
    }
}

impl FromStr for CellSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (m, f) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidConfig(format!("cell {s:?} is not MODEL:FEATURES")))?;
        let spec = CellSpec {
            model: m.trim().parse()?,
            features: f.trim().parse()?,
        };
        if !grid_cells().contains(&spec) {
            return Err(Error::InvalidConfig(format!("{spec} is not a grid cell")));
        }
        Ok(spec)
    }
}

/// The full grid in report order: each classical model over the seven
/// feature sets, then the ANN over All Features, TFIDF and Doc2Vec, then the
/// four hybrids. A cell's position is its index here.
pub fn grid_cells() -> Vec<CellSpec> {
    let mut cells = Vec::with_capacity(35);
    for kind in ModelKind::ALL {
        for set in FeatureSet::ALL {
            cells.push(CellSpec {
                model: CellModel::Classical(kind),
                features: CellFeatures::Set(set),
            });
        }
    }
    for set in [FeatureSet::AllFeatures, FeatureSet::Tfidf, FeatureSet::Doc2Vec] {
        cells.push(CellSpec {
            model: CellModel::Ann,
            features: CellFeatures::Set(set),
        });
    }
    for v in HybridVariant::ALL {
        cells.push(CellSpec {
            model: CellModel::Ann,
            features: CellFeatures::Hybrid(v),
        });
    }
    cells
}

/// Parses an `--only` list; entries may also be comma-separated.
pub fn parse_only(items: &[String]) -> Result<Vec<CellSpec>> {
    let mut out = Vec::new();
    for item in items {
        for part in item.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let spec: CellSpec = part.parse()?;
            if !out.contains(&spec) {
                out.push(spec);
            }
        }
    }
    Ok(out)
}

/// Result of one grid cell. Failed cells carry `error` and no accuracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCell {
    pub spec: CellSpec,
    pub test_acc: Option<f64>,
    pub valid_acc: Option<f64>,
    pub seed: u64,
    pub runtime_sec: Option<f64>,
    pub error: Option<String>,
}

/// Majority-class accuracy of `split`.
pub fn majority_baseline(split: &[Statement]) -> Result<f64> {
    if split.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    let [fake, truth] = class_counts(split);
    Ok(fake.max(truth) as f64 / split.len() as f64)
}

/// A featurizer fitted on the full training split, with all three splits
/// transformed.
struct Prepared {
    train: Dataset,
    test: Dataset,
    valid: Dataset,
}

fn labels(s: &[Statement]) -> Vec<crate::dataset::BinaryLabel> {
    s.iter().map(|st| st.binary_label).collect()
}

fn texts(s: &[Statement]) -> Vec<&str> {
    s.iter().map(|st| st.text.as_str()).collect()
}

/// Featurizers depend only on the feature set, the training split and the
/// global seed, so every cell sharing a feature set can share one.
fn prepare(config: &RunConfig, set: FeatureSet, splits: &SplitSet) -> Result<Prepared> {
    let (f, x) = Featurizer::fit(set, &texts(&splits.train), &config.doc2vec, config.seed)?;
    let transform = |s: &[Statement]| -> Result<Dataset> {
        let m: FeatureMatrix = f.transform_all(&texts(s))?;
        Dataset::new(m, labels(s))
    };
    Ok(Prepared {
        train: Dataset::new(x, labels(&splits.train))?,
        test: transform(&splits.test)?,
        valid: transform(&splits.validation)?,
    })
}

fn cell_seed(config: &RunConfig, spec: CellSpec) -> u64 {
    let index = grid_cells().iter().position(|c| *c == spec).expect("grid cell") as u64;
    config.seed ^ index
}

fn evaluate(
    config: &RunConfig,
    spec: CellSpec,
    seed: u64,
    splits: &SplitSet,
    prepared: Option<&Prepared>,
) -> Result<(f64, f64)> {
    match (spec.model, spec.features) {
        (_, CellFeatures::Hybrid(v)) => {
            let e = build_hybrid(&splits.train, v, &config.ensemble_config(), seed)?;
            Ok((
                evaluate_hybrid(&e, &splits.test)?,
                evaluate_hybrid(&e, &splits.validation)?,
            ))
        }
        (model, CellFeatures::Set(_)) => {
            let p = prepared.expect("prepared features for non-hybrid cell");
            match model {
                CellModel::Classical(kind) => {
                    let m = BaseClassifier::fit(kind, &p.train, &config.classical, seed)?;
                    Ok((accuracy(&m, &p.test)?, accuracy(&m, &p.valid)?))
                }
                CellModel::Ann => {
                    let cfg = AnnConfig {
                        input_dim: p.train.dim(),
                        seed,
                        ..config.ann.clone()
                    };
                    let m = ann_train(ann_init(&cfg)?, &p.train, None)?;
                    Ok((accuracy(&m, &p.test)?, accuracy(&m, &p.valid)?))
                }
            }
        }
    }
}

fn finish(
    config: &RunConfig,
    spec: CellSpec,
    seed: u64,
    started: Instant,
    result: Result<(f64, f64)>,
) -> ExperimentCell {
    let runtime_sec = config.record_runtime.then(|| started.elapsed().as_secs_f64());
    match result {
        Ok((t, v)) => {
            info!("{spec}: test {t:.4} valid {v:.4}");
            ExperimentCell {
                spec,
                test_acc: Some(t),
                valid_acc: Some(v),
                seed,
                runtime_sec,
                error: None,
            }
        }
        Err(e) => {
            warn!("{spec} failed: {e}");
            ExperimentCell {
                spec,
                test_acc: None,
                valid_acc: None,
                seed,
                runtime_sec,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Runs a single cell from scratch. Errors are recorded in the cell.
pub fn run_cell(config: &RunConfig, spec: CellSpec, splits: &SplitSet) -> ExperimentCell {
    let seed = cell_seed(config, spec);
    let started = Instant::now();
    let result = match spec.features {
        CellFeatures::Set(set) => {
            prepare(config, set, splits).and_then(|p| evaluate(config, spec, seed, splits, Some(&p)))
        }
        CellFeatures::Hybrid(_) => evaluate(config, spec, seed, splits, None),
    };
    finish(config, spec, seed, started, result)
}

/// Cells in grid order plus the majority baselines of both evaluation
/// splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRun {
    pub seed: u64,
    pub cells: Vec<ExperimentCell>,
    pub majority_test: Option<f64>,
    pub majority_valid: Option<f64>,
}

impl GridRun {
    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }
}

/// Runs every cell selected by `config.only` (all 35 when empty).
pub fn run_grid(config: &RunConfig, splits: &SplitSet) -> Result<GridRun> {
    config.validate()?;
    let selected = parse_only(&config.only)?;
    let cells: Vec<CellSpec> = grid_cells()
        .into_iter()
        .filter(|c| selected.is_empty() || selected.contains(c))
        .collect();

    let mut sets: Vec<FeatureSet> = cells
        .iter()
        .filter_map(|c| match c.features {
            CellFeatures::Set(s) => Some(s),
            CellFeatures::Hybrid(_) => None,
        })
        .collect();
    sets.sort();
    sets.dedup();

    let prep = |set: FeatureSet| {
        let started = Instant::now();
        let p = prepare(config, set, splits);
        info!("features {set} ready in {:.1}s", started.elapsed().as_secs_f64());
        (set, p)
    };
    let prepared: BTreeMap<FeatureSet, Result<Prepared>> = if config.parallel {
        sets.par_iter().map(|&s| prep(s)).collect()
    } else {
        sets.iter().map(|&s| prep(s)).collect()
    };

    let run = |spec: CellSpec| {
        let seed = cell_seed(config, spec);
        let started = Instant::now();
        let result = match spec.features {
            CellFeatures::Set(set) => match &prepared[&set] {
                Ok(p) => evaluate(config, spec, seed, splits, Some(p)),
                Err(e) => Err(Error::InvalidConfig(format!("feature extraction failed: {e}"))),
            },
            CellFeatures::Hybrid(_) => evaluate(config, spec, seed, splits, None),
        };
        finish(config, spec, seed, started, result)
    };
    let results = if config.parallel {
        cells.par_iter().map(|&c| run(c)).collect()
    } else {
        cells.iter().map(|&c| run(c)).collect()
    };
    Ok(GridRun {
        seed: config.seed,
        cells: results,
        majority_test: majority_baseline(&splits.test).ok(),
        majority_valid: majority_baseline(&splits.validation).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::RawLabel;

    #[test]
    fn grid_has_35_cells() {
        let cells = grid_cells();
        assert_eq!(cells.len(), 35);
        let mut dedup = cells.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 35);
    }

    #[test]
    fn only_filter_parses() {
        let one = parse_only(&["svm:tfidf".to_string()]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].to_string(), "svm:tfidf");
        let many = parse_only(&["ann:v3, rf:doc2vec".to_string(), "ann:v3".to_string()]).unwrap();
        assert_eq!(many.len(), 2);
        assert!(parse_only(&["svm:v1".to_string()]).is_err());
        assert!(parse_only(&["ann:countword".to_string()]).is_err());
        assert!(parse_only(&["svm".to_string()]).is_err());
    }

    #[test]
    fn majority() {
        let s = |l| Statement::new("i", l, "t");
        assert!(
            (majority_baseline(&[s(RawLabel::True), s(RawLabel::True), s(RawLabel::False)]).unwrap() - 2.0 / 3.0).abs()
                < 1e-15
        );
        assert_eq!(
            majority_baseline(&[s(RawLabel::False), s(RawLabel::PantsFire)]).unwrap(),
            1.0
        );
        assert!(matches!(majority_baseline(&[]), Err(Error::EmptyEvalSet)));
    }
}
