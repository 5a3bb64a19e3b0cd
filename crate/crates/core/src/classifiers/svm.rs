use serde::{Deserialize, Serialize};

use super::{argmax_first, class_index, softmax, validate_training, ClassifierError, Prediction, Standardizer};
use crate::seed::SeedTree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub epochs: usize,
    pub lambda: f64,
    pub standardize: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { epochs: 200, lambda: 1e-3, standardize: true }
    }
}

/// Linear one-vs-rest SVM trained with Pegasos subgradient steps.
///
/// The bias is treated as the weight of a constant-1 input, so it is
/// regularized and projected together with `w`. Epoch `e` visits samples
/// in the order given by shuffling `0..n` with
/// `SeedTree::new(seed).rng("svm-epoch", e)`; all classes share that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    classes: Vec<usize>,
    standardizer: Option<Standardizer>,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

impl LinearSvm {
    pub fn fit(x: &[Vec<f64>], y: &[usize], params: &SvmParams, seed: u64) -> Result<Self, ClassifierError> {
        let d = validate_training(x, y)?;
        if params.lambda.is_nan() || params.lambda <= 0.0 || params.epochs == 0 {
            return Err(ClassifierError::InvalidParameter("svm needs lambda > 0 and epochs >= 1".into()));
        }
        let (classes, idx) = class_index(y);
        if classes.len() < 2 {
            return Err(ClassifierError::SingleClass);
        }
        let standardizer = params.standardize.then(|| Standardizer::fit(x));
        let data = match &standardizer {
            Some(s) => s.transform_all(x),
            None => x.to_vec(),
        };

        let seeds = SeedTree::new(seed);
        let orders: Vec<Vec<usize>> = (0..params.epochs as u64)
            .map(|e| {
                let mut order: Vec<usize> = (0..data.len()).collect();
                seeds.rng("svm-epoch", e).shuffle(&mut order);
                order
            })
            .collect();

        let lambda = params.lambda;
        let radius = 1.0 / lambda.sqrt();
        let mut weights = Vec::with_capacity(classes.len());
        let mut biases = Vec::with_capacity(classes.len());
        for c in 0..classes.len() {
            let mut w = vec![0.0; d];
            let mut b = 0.0;
            let mut t = 0u64;
            for order in &orders {
                for &i in order {
                    t += 1;
                    let eta = 1.0 / (lambda * t as f64);
                    let target = if idx[i] == c { 1.0 } else { -1.0 };
                    let margin = target * (dot(&w, &data[i]) + b);
                    let shrink = 1.0 - eta * lambda;
                    w.iter_mut().for_each(|v| *v *= shrink);
                    b *= shrink;
                    if margin < 1.0 {
                        for (wj, xj) in w.iter_mut().zip(&data[i]) {
                            *wj += eta * target * xj;
                        }
                        b += eta * target;
                    }
                    let norm = (dot(&w, &w) + b * b).sqrt();
                    if norm > radius {
                        let s = radius / norm;
                        w.iter_mut().for_each(|v| *v *= s);
                        b *= s;
                    }
                }
            }
            weights.push(w);
            biases.push(b);
        }
        Ok(Self { classes, standardizer, weights, biases })
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// `w_c · x + b_c` per class.
    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        let q = match &self.standardizer {
            Some(s) => s.transform(x),
            None => x.to_vec(),
        };
        self.weights.iter().zip(&self.biases).map(|(w, b)| dot(w, &q) + b).collect()
    }

    pub fn predict(&self, x: &[f64]) -> Prediction {
        let m = self.margins(x);
        let best = argmax_first(&m);
        Prediction::new(self.classes[best], softmax(&m)[best])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::Label;
    use crate::seed::SplitMix64;

    fn line() -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let (v, c) = if i % 2 == 0 { (-1.0, 0) } else { (1.0, 1) };
            x.push(vec![v]);
            y.push(c);
        }
        (x, y)
    }

    #[test]
    fn separable_line_is_fit_perfectly() {
        let (x, y) = line();
        let m = LinearSvm::fit(&x, &y, &SvmParams::default(), 1).unwrap();
        for (xi, &yi) in x.iter().zip(&y) {
            assert_eq!(m.predict(xi).label, Label::Class(yi));
        }
    }

    #[test]
    fn scaling_is_absorbed_by_standardizer() {
        let mut rng = SplitMix64::new(11);
        let x: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.normal(), rng.normal() * 3.0]).collect();
        let y: Vec<usize> = x.iter().map(|r| (r[0] + r[1] > 0.0) as usize + (r[0] > 1.0) as usize).collect();
        let scaled: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|v| v * 10.0).collect()).collect();
        let p = SvmParams { epochs: 30, ..Default::default() };
        let a = LinearSvm::fit(&x, &y, &p, 4).unwrap();
        let b = LinearSvm::fit(&scaled, &y, &p, 4).unwrap();
        for (xi, si) in x.iter().zip(&scaled) {
            assert_eq!(a.predict(xi).label, b.predict(si).label);
        }
    }

    #[test]
    fn seeded_weights_repeat() {
        let (x, y) = line();
        let p = SvmParams { epochs: 5, ..Default::default() };
        let a = LinearSvm::fit(&x, &y, &p, 3).unwrap();
        let b = LinearSvm::fit(&x, &y, &p, 3).unwrap();
        assert_eq!(a.weights(), b.weights());
        assert_eq!(a.biases(), b.biases());
    }

    #[test]
    fn single_class_rejected() {
        assert_eq!(
            LinearSvm::fit(&[vec![1.0], vec![2.0]], &[0, 0], &SvmParams::default(), 0),
            Err(ClassifierError::SingleClass)
        );
    }

    #[test]
    fn confidence_is_softmax_of_margins() {
        let (x, y) = line();
        let m = LinearSvm::fit(&x, &y, &SvmParams::default(), 1).unwrap();
        let margins = m.margins(&[0.3]);
        let p = m.predict(&[0.3]);
        let expect = softmax(&margins)[argmax_first(&margins)];
        assert_eq!(p.confidence, expect);
        assert!(p.confidence >= 0.5 && p.confidence <= 1.0);
    }
}
