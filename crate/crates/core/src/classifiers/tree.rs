use serde::{Deserialize, Serialize};

use super::{argmax_first, class_index, validate_training, ClassifierError, Prediction};
use crate::seed::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    /// 0 means unbounded.
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: 12, min_leaf: 2 }
    }
}

impl TreeParams {
    pub fn unbounded(min_leaf: usize) -> Self {
        Self { max_depth: 0, min_leaf }
    }

    fn validate(&self) -> Result<(), ClassifierError> {
        if self.min_leaf == 0 {
            return Err(ClassifierError::InvalidParameter("min_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Samples reaching the leaf, per class index.
    Leaf { counts: Vec<u32> },
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART classification tree with Gini impurity. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    classes: Vec<usize>,
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn fit(x: &[Vec<f64>], y: &[usize], params: &TreeParams) -> Result<Self, ClassifierError> {
        validate_training(x, y)?;
        params.validate()?;
        let (classes, idx) = class_index(y);
        let samples: Vec<usize> = (0..x.len()).collect();
        let nodes = grow(x, &idx, classes.len(), samples, params, None);
        Ok(Self { classes, nodes })
    }

    pub(crate) fn from_parts(classes: Vec<usize>, nodes: Vec<Node>) -> Self {
        Self { classes, nodes }
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn internal_nodes(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Class-index counts of the leaf `x` lands in.
    pub(crate) fn leaf_counts(&self, x: &[f64]) -> &[u32] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return counts,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Winning class index and its leaf fraction.
    pub(crate) fn predict_index(&self, x: &[f64]) -> (usize, f64) {
        let counts = self.leaf_counts(x);
        let best = argmax_first(counts);
        let total: u32 = counts.iter().sum();
        (best, counts[best] as f64 / total as f64)
    }

    pub fn predict(&self, x: &[f64]) -> Prediction {
        let (best, conf) = self.predict_index(x);
        Prediction::new(self.classes[best], conf)
    }
}

/// Per-split random feature subset, as used by the forest.
pub(crate) struct FeatureSampler {
    pub rng: SplitMix64,
    pub max_features: usize,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    /// Σ_left c²/n_left + Σ_right c²/n_right as an exact fraction; larger
    /// means lower weighted Gini impurity.
    num: u128,
    den: u128,
    /// Position in the sorted sample order where the left side ends.
    split_at: usize,
}

impl Candidate {
    // Higher purity wins; exact ties go to lower feature, then lower threshold.
    fn beats(&self, other: &Candidate) -> bool {
        let lhs = self.num * other.den;
        let rhs = other.num * self.den;
        if lhs != rhs {
            return lhs > rhs;
        }
        if self.feature != other.feature {
            return self.feature < other.feature;
        }
        self.threshold < other.threshold
    }
}

pub(crate) fn grow(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    samples: Vec<usize>,
    params: &TreeParams,
    mut sampler: Option<FeatureSampler>,
) -> Vec<Node> {
    let mut nodes = Vec::new();
    let builder = Builder { x, y, n_classes, params };
    builder.build(&mut nodes, samples, 0, &mut sampler);
    nodes
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    params: &'a TreeParams,
}

impl Builder<'_> {
    fn build(
        &self,
        nodes: &mut Vec<Node>,
        samples: Vec<usize>,
        depth: usize,
        sampler: &mut Option<FeatureSampler>,
    ) -> usize {
        let at = nodes.len();
        let mut counts = vec![0u32; self.n_classes];
        for &i in &samples {
            counts[self.y[i]] += 1;
        }
        nodes.push(Node::Leaf { counts: counts.clone() });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.params.max_depth != 0 && depth >= self.params.max_depth;
        if pure || depth_capped || samples.len() < 2 * self.params.min_leaf {
            return at;
        }
        let Some((best, order)) = self.find_split(&samples, sampler) else {
            return at;
        };
        let left_samples = order[..best.split_at].to_vec();
        let right_samples = order[best.split_at..].to_vec();
        let left = self.build(nodes, left_samples, depth + 1, sampler);
        let right = self.build(nodes, right_samples, depth + 1, sampler);
        nodes[at] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        at
    }

    fn find_split(
        &self,
        samples: &[usize],
        sampler: &mut Option<FeatureSampler>,
    ) -> Option<(Candidate, Vec<usize>)> {
        let d = self.x[0].len();
        let mut best: Option<(Candidate, Vec<usize>)> = None;
        let mut consider = |cand: Option<(Candidate, Vec<usize>)>| -> bool {
            match cand {
                Some(c) => {
                    if best.as_ref().is_none_or(|(b, _)| c.0.beats(b)) {
                        best = Some(c);
                    }
                    true
                }
                None => false,
            }
        };
        match sampler {
            None => {
                for f in 0..d {
                    consider(self.best_for_feature(samples, f));
                }
            }
            Some(s) => {
                // Features with no admissible split do not use up the budget.
                let mut perm: Vec<usize> = (0..d).collect();
                s.rng.shuffle(&mut perm);
                let mut found = 0;
                for f in perm {
                    if found == s.max_features {
                        break;
                    }
                    if consider(self.best_for_feature(samples, f)) {
                        found += 1;
                    }
                }
            }
        }
        best
    }

    fn best_for_feature(&self, samples: &[usize], f: usize) -> Option<(Candidate, Vec<usize>)> {
        let mut order = samples.to_vec();
        order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
        let n = order.len();
        let min_leaf = self.params.min_leaf;

        let mut right = vec![0u64; self.n_classes];
        for &i in &order {
            right[self.y[i]] += 1;
        }
        let mut left = vec![0u64; self.n_classes];
        let mut sq_left: u128 = 0;
        let mut sq_right: u128 = right.iter().map(|&c| (c * c) as u128).sum();

        let mut best: Option<Candidate> = None;
        for k in 0..n - 1 {
            let c = self.y[order[k]];
            sq_left += (2 * left[c] + 1) as u128;
            sq_right -= (2 * right[c] - 1) as u128;
            left[c] += 1;
            right[c] -= 1;

            let (n_left, n_right) = (k + 1, n - k - 1);
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let (lo, hi) = (self.x[order[k]][f], self.x[order[k + 1]][f]);
            if lo >= hi {
                continue;
            }
            let mut threshold = lo + (hi - lo) / 2.0;
            if threshold >= hi {
                threshold = lo;
            }
            let cand = Candidate {
                feature: f,
                threshold,
                num: sq_left * n_right as u128 + sq_right * n_left as u128,
                den: (n_left * n_right) as u128,
                split_at: k + 1,
            };
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(cand);
            }
        }
        best.map(|b| (b, order))
    }
}
