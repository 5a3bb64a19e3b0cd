//! Combiners over aligned per-model prediction streams: majority voting
//! and the priority cascade ("combined classifier").

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{Algorithm, Label, Prediction};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnsembleError {
    #[error("prediction matrix is empty")]
    EmptyMatrix,
    #[error("row {row} has {len} predictions, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("every model abstained on row {row}")]
    CascadeExhausted { row: usize },
}

/// One row per sample, one column per model in `model_order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionMatrix {
    pub model_order: Vec<Algorithm>,
    pub rows: Vec<Vec<Prediction>>,
}

impl PredictionMatrix {
    pub fn new(model_order: Vec<Algorithm>, rows: Vec<Vec<Prediction>>) -> Self {
        Self { model_order, rows }
    }

    /// Transposes per-model prediction columns into rows.
    pub fn from_columns(
        model_order: Vec<Algorithm>,
        columns: &[Vec<Prediction>],
    ) -> Result<Self, EnsembleError> {
        if columns.len() != model_order.len() {
            return Err(EnsembleError::RaggedRow { row: 0, len: columns.len(), expected: model_order.len() });
        }
        let n = columns.first().map_or(0, Vec::len);
        if let Some((m, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(EnsembleError::RaggedRow { row: m, len: c.len(), expected: n });
        }
        let rows = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
        Ok(Self { model_order, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.rows.is_empty() || self.model_order.is_empty() {
            return Err(EnsembleError::EmptyMatrix);
        }
        let expected = self.model_order.len();
        for (row, r) in self.rows.iter().enumerate() {
            if r.len() != expected {
                return Err(EnsembleError::RaggedRow { row, len: r.len(), expected });
            }
        }
        Ok(())
    }

    pub fn column(&self, model: usize) -> Vec<Prediction> {
        self.rows.iter().map(|r| r[model]).collect()
    }
}

/// Most frequent non-Unknown label of one row.
///
/// Ties go to whichever tied label was voted by the earliest model.
/// Confidence is the winner's share of the non-abstaining voters.
pub fn vote_row(row: &[Prediction]) -> Prediction {
    // (label, votes, first model position)
    let mut tally: Vec<(usize, usize, usize)> = Vec::new();
    let mut voters = 0;
    for (pos, p) in row.iter().enumerate() {
        let Label::Class(c) = p.label else { continue };
        voters += 1;
        match tally.iter_mut().find(|t| t.0 == c) {
            Some(t) => t.1 += 1,
            None => tally.push((c, 1, pos)),
        }
    }
    let winner = tally
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)));
    match winner {
        Some(&(c, votes, _)) => Prediction::new(c, votes as f64 / voters as f64),
        None => Prediction::unknown(0.0),
    }
}

pub fn voting_ensemble(pm: &PredictionMatrix) -> Result<Vec<Prediction>, EnsembleError> {
    pm.validate()?;
    Ok(pm.rows.iter().map(|r| vote_row(r)).collect())
}

/// First non-Unknown prediction in model order; the last model is taken
/// as-is, Unknown included.
pub fn cascade_row(row: &[Prediction]) -> Prediction {
    let (last, head) = row.split_last().expect("nonempty row");
    head.iter().copied().find(|p| !p.label.is_unknown()).unwrap_or(*last)
}

pub fn combined_classifier(pm: &PredictionMatrix) -> Result<Vec<Prediction>, EnsembleError> {
    pm.validate()?;
    Ok(pm.rows.iter().map(|r| cascade_row(r)).collect())
}

/// Like [`combined_classifier`] but fails when every model abstains.
pub fn combined_classifier_strict(pm: &PredictionMatrix) -> Result<Vec<Prediction>, EnsembleError> {
    pm.validate()?;
    pm.rows
        .iter()
        .enumerate()
        .map(|(row, r)| {
            r.iter()
                .copied()
                .find(|p| !p.label.is_unknown())
                .ok_or(EnsembleError::CascadeExhausted { row })
        })
        .collect()
}
