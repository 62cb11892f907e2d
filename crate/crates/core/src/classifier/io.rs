use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MlpModel;
use crate::error::{Error, Result};
use crate::features::Family;

pub const MODEL_FORMAT: &str = "glyph-mlp/1";

/// On-disk form of one trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub family: Option<Family>,
    /// Class names by output index.
    pub labels: Vec<String>,
    #[serde(flatten)]
    pub model: MlpModel,
}

impl ModelDocument {
    pub fn new(model: MlpModel, family: Option<Family>, labels: Vec<String>) -> Self {
        ModelDocument {
            format: MODEL_FORMAT.into(),
            family,
            labels,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Format(format!(
                "unsupported model format {:?}",
                doc.format
            )));
        }
        let m = &doc.model;
        let checked = MlpModel::from_layers(m.config.clone(), m.hidden.clone(), m.output.clone())?;
        if !doc.labels.is_empty() && doc.labels.len() != checked.config.output_size {
            return Err(Error::Format(format!(
                "{} labels for {} outputs",
                doc.labels.len(),
                checked.config.output_size
            )));
        }
        Ok(ModelDocument {
            model: checked,
            ..doc
        })
    }
}

pub fn save_model(path: &Path, doc: &ModelDocument) -> Result<()> {
    fs::write(path, doc.to_json()?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelDocument> {
    ModelDocument::from_json(&fs::read_to_string(path)?)
}
