use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::classifiers::{Algorithm, ClassifierParams};
use crate::features::{fingerprint, FeatureSchema};
use crate::glcm::GlcmConfig;
use crate::histogram;

/// Abstention threshold per classifier; 0 disables abstention.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TauConfig {
    pub rf: f64,
    pub svm: f64,
    pub knn: f64,
    pub nb: f64,
    pub dt: f64,
}

impl TauConfig {
    pub fn get(&self, a: Algorithm) -> f64 {
        match a {
            Algorithm::RandomForest => self.rf,
            Algorithm::Svm => self.svm,
            Algorithm::Knn => self.knn,
            Algorithm::NaiveBayes => self.nb,
            Algorithm::DecisionTree => self.dt,
        }
    }

    pub fn set(&mut self, a: Algorithm, tau: f64) {
        let slot = match a {
            Algorithm::RandomForest => &mut self.rf,
            Algorithm::Svm => &mut self.svm,
            Algorithm::Knn => &mut self.knn,
            Algorithm::NaiveBayes => &mut self.nb,
            Algorithm::DecisionTree => &mut self.dt,
        };
        *slot = tau;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Uniform (width, height) every image is resized to.
    pub resize: [usize; 2],
    pub glcm: GlcmConfig,
    pub hist_bins: usize,
    pub classifiers: ClassifierParams,
    pub tau: TauConfig,
    pub model_order: Vec<Algorithm>,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            resize: [64, 64],
            glcm: GlcmConfig::default(),
            hist_bins: 16,
            classifiers: ClassifierParams::default(),
            tau: TauConfig::default(),
            model_order: Algorithm::ALL.to_vec(),
            test_fraction: 0.2,
            seed: 42,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.resize[0] == 0 || self.resize[1] == 0 {
            return bad(format!("resize target {:?} must be positive", self.resize));
        }
        self.glcm.validate()?;
        if !(1..=256).contains(&self.hist_bins) {
            return bad(format!("hist_bins {} not in 1..=256", self.hist_bins));
        }
        for a in Algorithm::ALL {
            let t = self.tau.get(a);
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("tau for {a} is {t}, expected [0, 1]"));
            }
        }
        if self.model_order.is_empty() {
            return bad("model_order is empty".into());
        }
        let mut seen = self.model_order.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.model_order.len() {
            return bad("model_order lists a classifier twice".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test_fraction {} not in (0, 1)", self.test_fraction));
        }
        Ok(())
    }

    /// GLCM block followed by histogram block.
    pub fn feature_schema(&self) -> FeatureSchema {
        self.glcm.schema().concat(&histogram::schema(self.hist_bins))
    }

    /// Hash of the canonical serialization of the whole config.
    pub fn fingerprint(&self) -> String {
        fingerprint(serde_json::to_string(self).expect("serializable").as_bytes())
    }

    /// Hash of the fields that affect extracted features.
    pub fn extraction_fingerprint(&self) -> String {
        let canon = serde_json::json!({
            "resize": self.resize,
            "glcm": self.glcm,
            "hist_bins": self.hist_bins,
            "schema": self.feature_schema().fingerprint,
        });
        fingerprint(canon.to_string().as_bytes())
    }
}
