//! Stratified splitting, confusion matrices and the accuracy /
//! precision / recall / F1 suite.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::Label;
use crate::seed::SeedTree;

#[derive(Debug, Error, PartialEq)]
pub enum EvaluationError {
    #[error("class {class} has {count} samples; a stratified split needs at least 2")]
    ClassTooSmall { class: usize, count: usize },
    #[error("test fraction {0} not in (0, 1)")]
    InvalidFraction(f64),
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("true label {0} is outside the class universe")]
    UnknownTrueLabel(usize),
    #[error("predicted label {0} is outside the class universe")]
    UnknownPredictedLabel(usize),
    #[error("confusion matrix has no samples")]
    EmptyMatrix,
}

/// Sample indices of each partition, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per class, shuffle its samples with `rng("split", class)` and send the
/// first `round(n_c * test_fraction)` (clamped to `1..n_c`) to test.
pub fn stratified_split(labels: &[usize], test_fraction: f64, seed: u64) -> Result<Split, EvaluationError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvaluationError::InvalidFraction(test_fraction));
    }
    let seeds = SeedTree::new(seed);
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let mut train = Vec::new();
    let mut test = Vec::new();
    for &class in &classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let n = members.len();
        if n < 2 {
            return Err(EvaluationError::ClassTooSmall { class, count: n });
        }
        seeds.rng("split", class as u64).shuffle(&mut members);
        let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// Rows are true classes, columns predicted classes, plus a per-row count
/// of Unknown predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub unknown: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum::<u64>() + self.unknown.iter().sum::<u64>()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn has_unknown(&self) -> bool {
        self.unknown.iter().any(|&u| u > 0)
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }
}

pub fn confusion(
    y_true: &[usize],
    y_pred: &[Label],
    classes: &[String],
) -> Result<ConfusionMatrix, EvaluationError> {
    if y_true.len() != y_pred.len() {
        return Err(EvaluationError::LengthMismatch { truth: y_true.len(), predicted: y_pred.len() });
    }
    let c = classes.len();
    let mut counts = vec![vec![0u64; c]; c];
    let mut unknown = vec![0u64; c];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= c {
            return Err(EvaluationError::UnknownTrueLabel(t));
        }
        match p {
            Label::Class(q) if q >= c => return Err(EvaluationError::UnknownPredictedLabel(q)),
            Label::Class(q) => counts[t][q] += 1,
            Label::Unknown => unknown[t] += 1,
        }
    }
    Ok(ConfusionMatrix { classes: classes.to_vec(), counts, unknown })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Headline numbers are macro averages over the class universe; micro
/// averages are kept alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Unknown predictions are false negatives for their true class and count
/// as a positive prediction of no class.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport, EvaluationError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvaluationError::EmptyMatrix);
    }
    let c = cm.n_classes();
    let trace = cm.trace();
    let per_class: Vec<ClassMetrics> = (0..c)
        .map(|k| {
            let tp = cm.counts[k][k];
            let predicted: u64 = (0..c).map(|t| cm.counts[t][k]).sum();
            let support: u64 = cm.counts[k].iter().sum::<u64>() + cm.unknown[k];
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            ClassMetrics {
                class: cm.classes[k].clone(),
                support,
                precision,
                recall,
                f1: harmonic_mean(precision, recall),
            }
        })
        .collect();
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / c as f64;
    let abstained: u64 = cm.unknown.iter().sum();
    let micro_precision = ratio(trace, total - abstained);
    let micro_recall = ratio(trace, total);
    Ok(MetricsReport {
        accuracy: ratio(trace, total),
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f1: mean(|m| m.f1),
        micro_precision,
        micro_recall,
        micro_f1: harmonic_mean(micro_precision, micro_recall),
        per_class,
    })
}
