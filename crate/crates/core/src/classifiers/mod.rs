//! Base classifiers sharing one fit/predict contract.
//!
//! Every model predicts a class id together with a confidence in `[0, 1]`:
//!
//! | model | confidence |
//! |-------|------------|
//! | k-NN  | fraction of the k neighbours voting for the winner |
//! | Gaussian NB | posterior of the winner (softmax over log-joint) |
//! | decision tree | majority fraction of the reached leaf |
//! | random forest | fraction of trees voting for the winner |
//! | linear SVM | softmax over the one-vs-rest margins |
//!
//! A [`TrainedModel`] wraps a fitted model with its abstention threshold τ
//! and the feature schema it was trained on. Predictions whose confidence
//! falls below τ come back as [`Label::Unknown`].

mod forest;
mod knn;
mod naive_bayes;
mod standardize;
mod svm;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use forest::{ForestParams, MaxFeatures, RandomForest};
pub use knn::{KnnModel, KnnParams};
pub use naive_bayes::{GaussianNb, NbParams};
pub use standardize::Standardizer;
pub use svm::{LinearSvm, SvmParams};
pub use tree::{DecisionTree, Node, TreeParams};

use crate::seed::SeedTree;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("one-vs-rest training needs at least two classes")]
    SingleClass,
    #[error("{features} feature rows but {labels} labels")]
    LabelCountMismatch { features: usize, labels: usize },
    #[error("expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite feature value in row {row}")]
    NonFinite { row: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidParameter(String),
}

/// Predicted class id, or an abstention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Class(usize),
    Unknown,
}

impl Label {
    pub fn class(self) -> Option<usize> {
        match self {
            Label::Class(c) => Some(c),
            Label::Unknown => None,
        }
    }

    pub fn is_unknown(self) -> bool {
        self == Label::Unknown
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub confidence: f64,
}

impl Prediction {
    pub fn new(class: usize, confidence: f64) -> Self {
        Self { label: Label::Class(class), confidence }
    }

    pub fn unknown(confidence: f64) -> Self {
        Self { label: Label::Unknown, confidence }
    }
}

/// Abstains when the confidence is strictly below `tau`. `tau = 0` is a no-op.
pub fn apply_threshold(p: Prediction, tau: f64) -> Prediction {
    if p.confidence < tau {
        Prediction { label: Label::Unknown, confidence: p.confidence }
    } else {
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "rf")]
    RandomForest,
    #[serde(rename = "svm")]
    Svm,
    #[serde(rename = "knn")]
    Knn,
    #[serde(rename = "nb")]
    NaiveBayes,
    #[serde(rename = "dt")]
    DecisionTree,
}

impl Algorithm {
    /// Priority order of the cascade: RF, SVM, k-NN, NB, DT.
    pub const ALL: [Algorithm; 5] = [
        Algorithm::RandomForest,
        Algorithm::Svm,
        Algorithm::Knn,
        Algorithm::NaiveBayes,
        Algorithm::DecisionTree,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::RandomForest => "rf",
            Algorithm::Svm => "svm",
            Algorithm::Knn => "knn",
            Algorithm::NaiveBayes => "nb",
            Algorithm::DecisionTree => "dt",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::RandomForest => "Random Forest (RF)",
            Algorithm::Svm => "Support Vector Machine (SVM)",
            Algorithm::Knn => "k-Nearest Neighbors (k-NN)",
            Algorithm::NaiveBayes => "Naive Bayes (NB)",
            Algorithm::DecisionTree => "Decision Tree (Tree)",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rf" => Ok(Algorithm::RandomForest),
            "svm" => Ok(Algorithm::Svm),
            "knn" | "k-nn" => Ok(Algorithm::Knn),
            "nb" => Ok(Algorithm::NaiveBayes),
            "dt" | "tree" => Ok(Algorithm::DecisionTree),
            other => Err(format!("unknown classifier {other:?} (expected rf, svm, knn, nb, dt)")),
        }
    }
}

/// Hyperparameters for all five models.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierParams {
    pub knn: KnnParams,
    pub nb: NbParams,
    pub dt: TreeParams,
    pub rf: ForestParams,
    pub svm: SvmParams,
}

/// Checks shapes and finiteness, returning the feature dimension.
pub(crate) fn validate_training(x: &[Vec<f64>], y: &[usize]) -> Result<usize, ClassifierError> {
    if x.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    if x.len() != y.len() {
        return Err(ClassifierError::LabelCountMismatch { features: x.len(), labels: y.len() });
    }
    let d = x[0].len();
    for (row, v) in x.iter().enumerate() {
        if v.len() != d {
            return Err(ClassifierError::DimensionMismatch { expected: d, actual: v.len() });
        }
        if !v.iter().all(|f| f.is_finite()) {
            return Err(ClassifierError::NonFinite { row });
        }
    }
    Ok(d)
}

/// Sorted distinct labels, and each sample's index into that list.
pub(crate) fn class_index(y: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let idx = y
        .iter()
        .map(|c| classes.binary_search(c).expect("label present"))
        .collect();
    (classes, idx)
}

/// Index of the largest count; ties go to the lowest index.
pub(crate) fn argmax_first<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax.
pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", content = "state")]
pub enum ModelKind {
    #[serde(rename = "rf")]
    RandomForest(RandomForest),
    #[serde(rename = "svm")]
    Svm(LinearSvm),
    #[serde(rename = "knn")]
    Knn(KnnModel),
    #[serde(rename = "nb")]
    NaiveBayes(GaussianNb),
    #[serde(rename = "dt")]
    DecisionTree(DecisionTree),
}

impl ModelKind {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            ModelKind::RandomForest(_) => Algorithm::RandomForest,
            ModelKind::Svm(_) => Algorithm::Svm,
            ModelKind::Knn(_) => Algorithm::Knn,
            ModelKind::NaiveBayes(_) => Algorithm::NaiveBayes,
            ModelKind::DecisionTree(_) => Algorithm::DecisionTree,
        }
    }

    pub fn classes(&self) -> &[usize] {
        match self {
            ModelKind::RandomForest(m) => m.classes(),
            ModelKind::Svm(m) => m.classes(),
            ModelKind::Knn(m) => m.classes(),
            ModelKind::NaiveBayes(m) => m.classes(),
            ModelKind::DecisionTree(m) => m.classes(),
        }
    }

    pub fn predict_raw(&self, x: &[f64]) -> Prediction {
        match self {
            ModelKind::RandomForest(m) => m.predict(x),
            ModelKind::Svm(m) => m.predict(x),
            ModelKind::Knn(m) => m.predict(x),
            ModelKind::NaiveBayes(m) => m.predict(x),
            ModelKind::DecisionTree(m) => m.predict(x),
        }
    }
}

/// Hyperparameters a model was fitted with, keyed by algorithm id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Hyperparameters {
    #[serde(rename = "rf")]
    RandomForest(ForestParams),
    #[serde(rename = "svm")]
    Svm(SvmParams),
    #[serde(rename = "knn")]
    Knn(KnnParams),
    #[serde(rename = "nb")]
    NaiveBayes(NbParams),
    #[serde(rename = "dt")]
    DecisionTree(TreeParams),
}

impl Hyperparameters {
    pub fn of(algorithm: Algorithm, params: &ClassifierParams) -> Self {
        match algorithm {
            Algorithm::RandomForest => Hyperparameters::RandomForest(params.rf.clone()),
            Algorithm::Svm => Hyperparameters::Svm(params.svm.clone()),
            Algorithm::Knn => Hyperparameters::Knn(params.knn.clone()),
            Algorithm::NaiveBayes => Hyperparameters::NaiveBayes(params.nb.clone()),
            Algorithm::DecisionTree => Hyperparameters::DecisionTree(params.dt.clone()),
        }
    }
}

/// A fitted model plus its abstention threshold and feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema_id: String,
    pub n_features: usize,
    pub tau: f64,
    pub hyperparameters: Hyperparameters,
    pub model: ModelKind,
}

impl TrainedModel {
    /// Fits `algorithm` on `(x, y)`. Seeded models draw from
    /// `seeds.derive(algorithm id, 0)`.
    pub fn fit(
        algorithm: Algorithm,
        params: &ClassifierParams,
        x: &[Vec<f64>],
        y: &[usize],
        seeds: &SeedTree,
        schema_id: &str,
        tau: f64,
    ) -> Result<Self, ClassifierError> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(ClassifierError::InvalidParameter(format!("tau {tau} not in [0, 1]")));
        }
        let n_features = validate_training(x, y)?;
        let seed = seeds.derive(algorithm.id(), 0);
        let model = match algorithm {
            Algorithm::RandomForest => ModelKind::RandomForest(RandomForest::fit(x, y, &params.rf, seed)?),
            Algorithm::Svm => ModelKind::Svm(LinearSvm::fit(x, y, &params.svm, seed)?),
            Algorithm::Knn => ModelKind::Knn(KnnModel::fit(x, y, &params.knn)?),
            Algorithm::NaiveBayes => ModelKind::NaiveBayes(GaussianNb::fit(x, y, &params.nb)?),
            Algorithm::DecisionTree => ModelKind::DecisionTree(DecisionTree::fit(x, y, &params.dt)?),
        };
        Ok(Self {
            schema_id: schema_id.to_string(),
            n_features,
            tau,
            hyperparameters: Hyperparameters::of(algorithm, params),
            model,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.model.algorithm()
    }

    pub fn classes(&self) -> &[usize] {
        self.model.classes()
    }

    pub fn predict_raw(&self, x: &[f64]) -> Result<Prediction, ClassifierError> {
        if x.len() != self.n_features {
            return Err(ClassifierError::DimensionMismatch { expected: self.n_features, actual: x.len() });
        }
        Ok(self.model.predict_raw(x))
    }

    /// Prediction after the τ threshold.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction, ClassifierError> {
        Ok(apply_threshold(self.predict_raw(x)?, self.tau))
    }

    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Prediction>, ClassifierError> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}
