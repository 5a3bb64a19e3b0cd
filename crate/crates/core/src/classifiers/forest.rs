use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, FeatureSampler};
use super::{argmax_first, class_index, validate_training, ClassifierError, DecisionTree, Prediction, TreeParams};
use crate::seed::{SeedTree, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// ⌈√d⌉ candidate features per split.
    #[default]
    Sqrt,
    /// Every feature at every split.
    All,
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((d as f64).sqrt().ceil() as usize).clamp(1, d.max(1)),
            MaxFeatures::All => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub bootstrap: bool,
    pub max_features: MaxFeatures,
}

impl Default for ForestParams {
    fn default() -> Self {
        let tree = TreeParams::default();
        Self {
            n_trees: 100,
            max_depth: tree.max_depth,
            min_leaf: tree.min_leaf,
            bootstrap: true,
            max_features: MaxFeatures::Sqrt,
        }
    }
}

impl ForestParams {
    pub fn tree_params(&self) -> TreeParams {
        TreeParams { max_depth: self.max_depth, min_leaf: self.min_leaf }
    }
}

/// Bagged CART trees with per-split feature subsampling.
///
/// Tree `i` draws its bootstrap sample and feature subsets from
/// `SeedTree::new(seed).derive("rf-tree", i)`, so the fitted forest does
/// not depend on how many worker threads build it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    classes: Vec<usize>,
    tree_seeds: Vec<u64>,
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[usize], params: &ForestParams, seed: u64) -> Result<Self, ClassifierError> {
        let d = validate_training(x, y)?;
        if params.n_trees == 0 {
            return Err(ClassifierError::InvalidParameter("n_trees must be >= 1".into()));
        }
        if params.min_leaf == 0 {
            return Err(ClassifierError::InvalidParameter("min_leaf must be >= 1".into()));
        }
        let (classes, idx) = class_index(y);
        let seeds = SeedTree::new(seed);
        let tree_seeds: Vec<u64> = (0..params.n_trees as u64).map(|i| seeds.derive("rf-tree", i)).collect();
        let tree_params = params.tree_params();
        let max_features = params.max_features.resolve(d);
        let n = x.len();

        let trees = tree_seeds
            .par_iter()
            .map(|&s| {
                let mut rng = SplitMix64::new(s);
                let samples: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.below(n as u64) as usize).collect()
                } else {
                    (0..n).collect()
                };
                let sampler = (max_features < d).then_some(FeatureSampler { rng, max_features });
                let nodes = grow(x, &idx, classes.len(), samples, &tree_params, sampler);
                DecisionTree::from_parts(classes.clone(), nodes)
            })
            .collect();
        Ok(Self { classes, tree_seeds, trees })
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn tree_seeds(&self) -> &[u64] {
        &self.tree_seeds
    }

    /// Majority over trees; vote ties go to the smaller class id.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        let mut votes = vec![0usize; self.classes.len()];
        for t in &self.trees {
            votes[t.predict_index(x).0] += 1;
        }
        let best = argmax_first(&votes);
        Prediction::new(self.classes[best], votes[best] as f64 / self.trees.len() as f64)
    }
}
