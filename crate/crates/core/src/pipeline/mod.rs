//! End-to-end orchestration: manifests, configuration, feature extraction
//! with caching, experiments, and model persistence.

mod config;
mod experiment;
mod extract;
mod manifest;
mod model_io;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{PipelineConfig, TauConfig};
pub use experiment::{
    run_experiment, run_on_table, ExperimentOutput, ExperimentResult, ModelResult, RESULT_FORMAT, RESULT_VERSION,
};
pub use extract::{
    extract_features, extract_features_cached, extract_image_features, features_from_images, CacheStatus,
    ExtractOptions, FeatureTable, SkippedImage,
};
pub use manifest::{DatasetManifest, ManifestEntry};
pub use model_io::{load_model, model_from_str, model_to_string, save_model, ModelIoError, MODEL_FORMAT, MODEL_VERSION};

use crate::classifiers::ClassifierError;
use crate::ensemble::EnsembleError;
use crate::evaluation::EvaluationError;
use crate::glcm::GlcmError;
use crate::histogram::HistogramError;
use crate::imaging::ImagingError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: ImagingError,
    },
    #[error("{}: {source}", path.display())]
    ImageFeatures {
        path: PathBuf,
        #[source]
        source: Box<PipelineError>,
    },
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Glcm(#[from] GlcmError),
    #[error(transparent)]
    Histogram(#[from] HistogramError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Model(#[from] ModelIoError),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("config: {0}")]
    Config(String),
    #[error("feature cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
