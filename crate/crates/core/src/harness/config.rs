use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classical::ClassicalConfig;
use crate::dataset::DEFAULT_STACK_RATIO;
use crate::ensemble::EnsembleConfig;
use crate::neural::AnnConfig;
use crate::vectorize::Doc2VecConfig;
use crate::{Error, Result};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Settings of the stacked hybrids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HybridConfig {
    pub ratio: f64,
    pub hard_labels: bool,
    pub meta: AnnConfig,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig {
            ratio: DEFAULT_STACK_RATIO,
            hard_labels: false,
            meta: AnnConfig::default(),
        }
    }
}

/// Everything a grid run depends on. Loaded from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    /// Directory holding `train.tsv`, `test.tsv` and `valid.tsv`.
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    /// Run grid cells concurrently. Results do not depend on this.
    pub parallel: bool,
    /// Write measured runtimes; when false the runtime column reads `NA`
    /// so reports are byte-reproducible.
    pub record_runtime: bool,
    /// Restrict the grid to these `model:features` cells.
    pub only: Vec<String>,
    pub classical: ClassicalConfig,
    pub doc2vec: Doc2VecConfig,
    /// Standalone ANN cells; `input_dim` is set from the features.
    pub ann: AnnConfig,
    pub hybrid: HybridConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed: 42,
            data_dir: PathBuf::from("data/liar"),
            output_dir: PathBuf::from("results"),
            parallel: false,
            record_runtime: true,
            only: Vec::new(),
            classical: ClassicalConfig::default(),
            doc2vec: Doc2VecConfig::default(),
            ann: AnnConfig::default(),
            hybrid: HybridConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Checks every setting that can be checked without data.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.doc2vec.validate()?;
        let c = &self.classical;
        if !(c.svm.lambda > 0.0 && c.svm.lambda.is_finite()) {
            return Err(Error::InvalidConfig("svm lambda must be positive".into()));
        }
        if c.knn.k < 1 {
            return Err(Error::InvalidConfig("knn k must be >= 1".into()));
        }
        if !c.logreg.auto_step && !(c.logreg.lr > 0.0 && c.logreg.lr.is_finite()) {
            return Err(Error::InvalidConfig("logreg lr must be positive".into()));
        }
        if c.forest.n_trees < 1 || c.forest.min_leaf < 1 || c.forest.mtry == Some(0) {
            return Err(Error::InvalidConfig(
                "forest n_trees, min_leaf and mtry must be >= 1".into(),
            ));
        }
        AnnConfig {
            input_dim: 1,
            ..self.ann.clone()
        }
        .validate()?;
        AnnConfig {
            input_dim: 1,
            ..self.hybrid.meta.clone()
        }
        .validate()?;
        if !(self.hybrid.ratio > 0.0 && self.hybrid.ratio < 1.0) {
            return Err(Error::InvalidConfig("hybrid ratio must lie in (0, 1)".into()));
        }
        super::grid::parse_only(&self.only)?;
        Ok(())
    }

    pub fn ensemble_config(&self) -> EnsembleConfig {
        EnsembleConfig {
            ratio: self.hybrid.ratio,
            classical: self.classical.clone(),
            doc2vec: self.doc2vec.clone(),
            meta: self.hybrid.meta.clone(),
            hard_labels: self.hybrid.hard_labels,
        }
    }
}
