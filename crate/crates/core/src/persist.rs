//! Versioned JSON model files.
//!
//! Every file is a single JSON object:
//!
//! ```text
//! { "format": "stacktext-model", "schema_version": 1, "payload": { ... } }
//! ```
//!
//! The payload is tagged by `"type"` (`classical`, `ann` or `hybrid`) and
//! holds the fitted featurizer next to the model, so a loaded file can score
//! raw text. Floats are written in shortest round-trip form and reload
//! bit-exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classical::{BaseClassifier, Classifier};
use crate::ensemble::{FittedBases, StackingEnsemble};
use crate::features::Featurizer;
use crate::neural::AnnModel;
use crate::{Error, Result};

pub const FORMAT: &str = "stacktext-model";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SavedModel {
    Classical {
        featurizer: Featurizer,
        model: BaseClassifier,
    },
    Ann {
        featurizer: Featurizer,
        model: AnnModel,
    },
    Hybrid {
        ensemble: Box<StackingEnsemble<FittedBases>>,
    },
}

impl SavedModel {
    /// Positive-class score for raw statement text.
    pub fn score(&self, text: &str) -> Result<f64> {
        match self {
            SavedModel::Classical { featurizer, model } => model.score(featurizer.transform(text)?.as_ref()),
            SavedModel::Ann { featurizer, model } => model.score(featurizer.transform(text)?.as_ref()),
            SavedModel::Hybrid { ensemble } => ensemble.score(text),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    schema_version: u32,
    payload: T,
}

pub fn to_json(model: &SavedModel) -> Result<String> {
    Ok(serde_json::to_string(&Envelope {
        format: FORMAT.to_string(),
        schema_version: SCHEMA_VERSION,
        payload: model,
    })?)
}

pub fn from_json(text: &str) -> Result<SavedModel> {
    #[derive(Deserialize)]
    struct Header {
        format: String,
        schema_version: u32,
    }
    let header: Header = serde_json::from_str(text)?;
    if header.format != FORMAT {
        return Err(Error::Persist(format!("unexpected format {:?}", header.format)));
    }
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::Persist(format!(
            "schema version {} is not supported (expected {SCHEMA_VERSION})",
            header.schema_version
        )));
    }
    let env: Envelope<SavedModel> = serde_json::from_str(text)?;
    Ok(env.payload)
}

pub fn save(path: impl AsRef<Path>, model: &SavedModel) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}
