//! Texture classification with GLCM and histogram features, five base
//! classifiers, and two ensemble combiners.
//!
//! The crate is organised bottom-up:
//!
//! * [`imaging`]: decoding (PGM, PNG), grayscale, resizing, quantization
//! * [`glcm`] and [`histogram`]: feature extractors
//! * [`classifiers`]: k-NN, Gaussian naive Bayes, CART, random forest,
//!   linear SVM, and the thresholded [`classifiers::TrainedModel`]
//! * [`ensemble`]: majority voting and the priority cascade
//! * [`evaluation`]: stratified splits, confusion matrices, metrics
//! * [`pipeline`]: manifests, config, cached extraction, experiments,
//!   model files
//! * [`report`]: summary tables and SVG charts
//! * [`synth`]: the seeded 4-class texture benchmark
//!
//! Randomness comes only from [`seed::SeedTree`], so results depend on
//! the master seed and never on thread count.

pub mod classifiers;
pub mod ensemble;
pub mod evaluation;
pub mod features;
pub mod glcm;
pub mod histogram;
pub mod imaging;
pub mod pipeline;
pub mod report;
pub mod seed;
pub mod synth;

pub use classifiers::{Algorithm, ClassifierError, ClassifierParams, Label, Prediction, TrainedModel};
pub use ensemble::{combined_classifier, voting_ensemble, EnsembleError, PredictionMatrix};
pub use evaluation::{confusion, metrics, stratified_split, ConfusionMatrix, EvaluationError, MetricsReport};
pub use features::{FeatureSchema, FeatureVector};
pub use glcm::{glcm_features, GlcmConfig, GlcmError};
pub use histogram::{hist_features, histogram, HistogramError};
pub use imaging::{GrayImage, ImagingError, QuantizedImage};
pub use pipeline::{DatasetManifest, ExperimentResult, PipelineConfig, PipelineError};
pub use seed::SeedTree;
