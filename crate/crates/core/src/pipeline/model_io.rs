use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{Algorithm, TrainedModel};

pub const MODEL_FORMAT: &str = "texture-ensemble-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("model file version {found}, this build reads version {expected}")]
    VersionMismatch { found: u64, expected: u32 },
    #[error("model was trained on feature schema {found}, expected {expected}")]
    SchemaMismatch { expected: String, found: String },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn confidence_rule(a: Algorithm) -> &'static str {
    match a {
        Algorithm::RandomForest => "fraction of trees voting for the predicted class",
        Algorithm::Svm => "softmax over one-vs-rest margins, taken at the predicted class",
        Algorithm::Knn => "fraction of the k nearest neighbours with the predicted class",
        Algorithm::NaiveBayes => "posterior probability of the predicted class",
        Algorithm::DecisionTree => "majority fraction of the reached leaf",
    }
}

#[derive(Serialize)]
struct ModelFileRef<'a> {
    format: &'a str,
    version: u32,
    confidence: &'a str,
    model: &'a TrainedModel,
}

#[derive(Deserialize)]
struct ModelFile {
    model: TrainedModel,
}

/// JSON document; numbers are written in shortest round-trip form so
/// reloading reproduces every weight bit for bit.
pub fn model_to_string(model: &TrainedModel) -> String {
    let doc = ModelFileRef {
        format: MODEL_FORMAT,
        version: MODEL_VERSION,
        confidence: confidence_rule(model.algorithm()),
        model,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

pub fn model_from_str(text: &str, expected_schema: Option<&str>) -> Result<TrainedModel, ModelIoError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ModelIoError::CorruptModel(e.to_string()))?;
    if value.get("format").and_then(|f| f.as_str()) != Some(MODEL_FORMAT) {
        return Err(ModelIoError::CorruptModel("not a texture-ensemble model".into()));
    }
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| ModelIoError::CorruptModel("missing version".into()))?;
    if version != MODEL_VERSION as u64 {
        return Err(ModelIoError::VersionMismatch { found: version, expected: MODEL_VERSION });
    }
    // Re-parse from text rather than from `value` so floats go through the
    // exact decimal parser once.
    let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelIoError::CorruptModel(e.to_string()))?;
    if let Some(expected) = expected_schema {
        if file.model.schema_id != expected {
            return Err(ModelIoError::SchemaMismatch {
                expected: expected.to_string(),
                found: file.model.schema_id,
            });
        }
    }
    Ok(file.model)
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<(), ModelIoError> {
    fs::write(path, model_to_string(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>, expected_schema: Option<&str>) -> Result<TrainedModel, ModelIoError> {
    model_from_str(&fs::read_to_string(path)?, expected_schema)
}
