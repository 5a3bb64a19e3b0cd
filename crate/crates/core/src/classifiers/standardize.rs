use serde::{Deserialize, Serialize};

/// Dimensions whose training deviation falls below this are centered but
/// not scaled.
pub const MIN_SCALE: f64 = 1e-12;

/// Per-dimension z-score fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation per column. `x` must be
    /// nonempty and rectangular.
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x[0].len();
        let n = x.len() as f64;
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in x {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
        Self { mean, std }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s < MIN_SCALE { v - m } else { (v - m) / s })
            .collect()
    }

    pub fn transform_all(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_training_mean() {
        let x = vec![vec![1.0, 5.0, 3.0], vec![3.0, 5.0, -1.0], vec![8.0, 5.0, 10.0]];
        let s = Standardizer::fit(&x);
        for v in s.transform(&s.mean) {
            assert!(v.abs() <= 1e-9);
        }
        // Constant column passes through centered, unscaled.
        assert_eq!(s.std[1], 0.0);
        assert_eq!(s.transform(&[0.0, 7.0, 0.0])[1], 2.0);
        let z = s.transform_all(&x);
        let col0: Vec<f64> = z.iter().map(|r| r[0]).collect();
        let var = col0.iter().map(|v| v * v).sum::<f64>() / 3.0;
        assert!((var - 1.0).abs() < 1e-12);
    }
}
