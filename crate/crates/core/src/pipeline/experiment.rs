use serde::{Deserialize, Serialize};

use super::{extract_features, DatasetManifest, ExtractOptions, FeatureTable, PipelineConfig, PipelineError};
use crate::classifiers::{Label, TrainedModel};
use crate::ensemble::{combined_classifier, voting_ensemble, PredictionMatrix};
use crate::evaluation::{confusion, metrics, stratified_split, ConfusionMatrix, MetricsReport};
use crate::seed::SeedTree;

pub const RESULT_FORMAT: &str = "texture-ensemble-result";
pub const RESULT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    /// `rf`, `svm`, `knn`, `nb`, `dt`, `ve` or `cc`.
    pub id: String,
    pub name: String,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub config_fingerprint: String,
    pub feature_schema: String,
    pub config: PipelineConfig,
    pub classes: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub results: Vec<ModelResult>,
}

impl ExperimentResult {
    pub fn get(&self, id: &str) -> Option<&ModelResult> {
        self.results.iter().find(|r| r.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub result: ExperimentResult,
    /// Fitted models in `model_order`.
    pub models: Vec<TrainedModel>,
    /// Test-set predictions, one column per model in `model_order`.
    pub predictions: PredictionMatrix,
    pub test_indices: Vec<usize>,
}

pub fn run_experiment(
    manifest: &DatasetManifest,
    cfg: &PipelineConfig,
    opts: ExtractOptions,
) -> Result<ExperimentOutput, PipelineError> {
    let (table, _) = extract_features(manifest, cfg, opts)?;
    run_on_table(&table, cfg)
}

/// Split → fit every model → predict the test set with τ applied →
/// voting and cascade → confusion matrices and metrics.
pub fn run_on_table(table: &FeatureTable, cfg: &PipelineConfig) -> Result<ExperimentOutput, PipelineError> {
    cfg.validate()?;
    if table.fingerprint != cfg.extraction_fingerprint() {
        return Err(PipelineError::Config("feature table was extracted with a different config".into()));
    }
    let seeds = SeedTree::new(cfg.seed);
    let (classes, y) = table.class_ids();
    let split = stratified_split(&y, cfg.test_fraction, seeds.derive("split", 0))?;

    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<usize>) {
        (idx.iter().map(|&i| table.rows[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect())
    };
    let (x_train, y_train) = pick(&split.train);
    let (x_test, y_test) = pick(&split.test);

    let model_seeds = seeds.subtree("models", 0);
    let mut models = Vec::with_capacity(cfg.model_order.len());
    let mut columns = Vec::with_capacity(cfg.model_order.len());
    for &alg in &cfg.model_order {
        log::info!("fitting {alg}");
        let model = TrainedModel::fit(
            alg,
            &cfg.classifiers,
            &x_train,
            &y_train,
            &model_seeds,
            &table.schema.fingerprint,
            cfg.tau.get(alg),
        )?;
        columns.push(model.predict_batch(&x_test)?);
        models.push(model);
    }
    let pm = PredictionMatrix::from_columns(cfg.model_order.clone(), &columns)?;
    let voted = voting_ensemble(&pm)?;
    let cascaded = combined_classifier(&pm)?;

    let evaluate = |id: &str, name: &str, preds: &[crate::classifiers::Prediction]| -> Result<ModelResult, PipelineError> {
        let labels: Vec<Label> = preds.iter().map(|p| p.label).collect();
        let cm = confusion(&y_test, &labels, &classes)?;
        let m = metrics(&cm)?;
        Ok(ModelResult { id: id.to_string(), name: name.to_string(), confusion: cm, metrics: m })
    };
    let mut results = Vec::with_capacity(cfg.model_order.len() + 2);
    for (alg, col) in cfg.model_order.iter().zip(&columns) {
        results.push(evaluate(alg.id(), alg.display_name(), col)?);
    }
    results.push(evaluate("ve", "Voting Ensemble (VE)", &voted)?);
    results.push(evaluate("cc", "Combined Classifier (CC)", &cascaded)?);

    let result = ExperimentResult {
        format: RESULT_FORMAT.to_string(),
        version: RESULT_VERSION,
        seed: cfg.seed,
        config_fingerprint: cfg.fingerprint(),
        feature_schema: table.schema.fingerprint.clone(),
        config: cfg.clone(),
        classes,
        n_train: split.train.len(),
        n_test: split.test.len(),
        results,
    };
    Ok(ExperimentOutput { result, models, predictions: pm, test_indices: split.test })
}
