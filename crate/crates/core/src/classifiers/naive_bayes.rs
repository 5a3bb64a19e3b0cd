use serde::{Deserialize, Serialize};

use super::{argmax_first, class_index, softmax, validate_training, ClassifierError, Prediction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NbParams {
    /// Added to every variance, as a fraction of the largest feature variance.
    pub var_smoothing: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        Self { var_smoothing: 1e-9 }
    }
}

/// Gaussian naive Bayes with per-class means, variances and log priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    classes: Vec<usize>,
    log_priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[usize], params: &NbParams) -> Result<Self, ClassifierError> {
        let d = validate_training(x, y)?;
        if params.var_smoothing.is_nan() || params.var_smoothing < 0.0 {
            return Err(ClassifierError::InvalidParameter("var_smoothing must be >= 0".into()));
        }
        let (classes, idx) = class_index(y);
        let c = classes.len();
        let n = x.len() as f64;

        let mut counts = vec![0usize; c];
        let mut means = vec![vec![0.0; d]; c];
        for (row, &k) in x.iter().zip(&idx) {
            counts[k] += 1;
            for (m, v) in means[k].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, &cnt) in means.iter_mut().zip(&counts) {
            m.iter_mut().for_each(|v| *v /= cnt as f64);
        }
        let mut variances = vec![vec![0.0; d]; c];
        for (row, &k) in x.iter().zip(&idx) {
            for ((s, v), m) in variances[k].iter_mut().zip(row).zip(&means[k]) {
                *s += (v - m) * (v - m);
            }
        }
        for (s, &cnt) in variances.iter_mut().zip(&counts) {
            s.iter_mut().for_each(|v| *v /= cnt as f64);
        }

        // Largest variance of any feature over the whole training set.
        let mut max_var: f64 = 0.0;
        for j in 0..d {
            let mu = x.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = x.iter().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / n;
            max_var = max_var.max(var);
        }
        let mut epsilon = params.var_smoothing * max_var;
        if epsilon <= 0.0 {
            epsilon = f64::MIN_POSITIVE.max(params.var_smoothing);
        }
        variances.iter_mut().flatten().for_each(|v| *v += epsilon);

        let log_priors = counts.iter().map(|&cnt| (cnt as f64 / n).ln()).collect();
        Ok(Self { classes, log_priors, means, variances })
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    /// Log prior plus summed log Gaussian densities, per class.
    pub fn log_joint(&self, x: &[f64]) -> Vec<f64> {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.log_priors
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(lp, (mu, var))| {
                lp + x
                    .iter()
                    .zip(mu.iter().zip(var))
                    .map(|(v, (m, s))| -0.5 * (ln_2pi + s.ln()) - (v - m) * (v - m) / (2.0 * s))
                    .sum::<f64>()
            })
            .collect()
    }

    /// Class posteriors in `classes()` order.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.log_joint(x))
    }

    pub fn predict(&self, x: &[f64]) -> Prediction {
        let post = self.predict_proba(x);
        let best = argmax_first(&post);
        Prediction::new(self.classes[best], post[best])
    }
}
