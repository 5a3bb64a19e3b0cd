use serde::{Deserialize, Serialize};

use super::{argmax_first, class_index, validate_training, ClassifierError, Prediction, Standardizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
    pub standardize: bool,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 5, standardize: true }
    }
}

/// k-nearest neighbours over (optionally standardized) Euclidean distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    classes: Vec<usize>,
    standardizer: Option<Standardizer>,
    points: Vec<Vec<f64>>,
    /// Index into `classes` per stored point.
    labels: Vec<usize>,
}

impl KnnModel {
    pub fn fit(x: &[Vec<f64>], y: &[usize], params: &KnnParams) -> Result<Self, ClassifierError> {
        validate_training(x, y)?;
        if params.k == 0 {
            return Err(ClassifierError::InvalidParameter("k must be >= 1".into()));
        }
        let k = if params.k > x.len() {
            log::warn!("k = {} exceeds {} training samples; clamping", params.k, x.len());
            x.len()
        } else {
            params.k
        };
        let (classes, labels) = class_index(y);
        let standardizer = params.standardize.then(|| Standardizer::fit(x));
        let points = match &standardizer {
            Some(s) => s.transform_all(x),
            None => x.to_vec(),
        };
        Ok(Self { k, classes, standardizer, points, labels })
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Majority among the k nearest. Distance ties go to the earlier
    /// training sample, vote ties to the smaller class id.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        let q = match &self.standardizer {
            Some(s) => s.transform(x),
            None => x.to_vec(),
        };
        let mut dist: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; self.classes.len()];
        for &(_, i) in &dist[..self.k] {
            votes[self.labels[i]] += 1;
        }
        let best = argmax_first(&votes);
        Prediction::new(self.classes[best], votes[best] as f64 / self.k as f64)
    }
}
