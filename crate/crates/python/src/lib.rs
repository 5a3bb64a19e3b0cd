//! Python bindings: images, feature extraction, model training and
//! persistence, the two ensemble combiners, metrics and full experiments.
//!
//! Predictions cross the boundary as `(label, confidence)` tuples where
//! `label` is an `int` class id or `None` for Unknown.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use engine::classifiers::{Algorithm, ClassifierParams, Label, Prediction};
use engine::ensemble::PredictionMatrix;
use engine::glcm::{Aggregation, GlcmConfig, Offset};
use engine::pipeline::{DatasetManifest, ExtractOptions, PipelineConfig};
use engine::seed::SeedTree;
use engine::synth::BenchmarkSpec;

create_exception!(texture_ensemble, TextureError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    TextureError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

type PyPrediction = (Option<usize>, f64);

fn to_py(p: Prediction) -> PyPrediction {
    (p.label.class(), p.confidence)
}

fn from_py(p: PyPrediction) -> Prediction {
    match p.0 {
        Some(c) => Prediction::new(c, p.1),
        None => Prediction { label: Label::Unknown, confidence: p.1 },
    }
}

fn parse_algorithm(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(PyValueError::new_err)
}

/// 8-bit grayscale image.
#[pyclass(name = "GrayImage", module = "texture_ensemble", frozen)]
struct PyGrayImage {
    inner: engine::GrayImage,
}

#[pymethods]
impl PyGrayImage {
    #[new]
    fn new(width: usize, height: usize, data: Vec<u8>) -> PyResult<Self> {
        Ok(Self { inner: engine::GrayImage::new(width, height, data).map_err(err)? })
    }

    /// Decodes a PGM (P2/P5) or PNG file to grayscale.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: engine::imaging::load_image(path).map_err(err)? })
    }

    #[staticmethod]
    fn decode(data: &[u8]) -> PyResult<Self> {
        Ok(Self { inner: engine::imaging::decode_image(data).map_err(err)? })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    /// Row-major pixel bytes.
    fn data<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.inner.data())
    }

    fn get(&self, x: usize, y: usize) -> PyResult<u8> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(PyValueError::new_err("pixel out of bounds"));
        }
        Ok(self.inner.get(x, y))
    }

    fn resize(&self, width: usize, height: usize) -> PyResult<Self> {
        Ok(Self { inner: engine::imaging::resize(&self.inner, width, height).map_err(err)? })
    }

    fn save_pgm(&self, path: PathBuf) -> PyResult<()> {
        engine::imaging::save_pgm(&self.inner, path).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("GrayImage({}x{})", self.inner.width(), self.inner.height())
    }
}

/// GLCM features of `image` quantized to `levels` gray levels.
///
/// `offsets` defaults to the four standard angles; `aggregation` is
/// `"mean"` (5 values) or `"concatenate"` (5 per offset).
#[pyfunction]
#[pyo3(signature = (image, levels=16, distance=1, offsets=None, symmetric=true, aggregation="mean"))]
fn glcm_features(
    image: &PyGrayImage,
    levels: usize,
    distance: u32,
    offsets: Option<Vec<(i32, i32)>>,
    symmetric: bool,
    aggregation: &str,
) -> PyResult<Vec<f64>> {
    let angles = match offsets {
        Some(list) => list.into_iter().map(|(dx, dy)| Offset::new(dx, dy)).collect::<Result<_, _>>().map_err(err)?,
        None => Offset::standard_angles(),
    };
    let aggregation = match aggregation {
        "mean" => Aggregation::Mean,
        "concatenate" => Aggregation::Concatenate,
        other => return Err(PyValueError::new_err(format!("unknown aggregation {other:?}"))),
    };
    let cfg = GlcmConfig { levels, distance, angles, symmetric, aggregation, ..GlcmConfig::default() };
    cfg.validate().map_err(err)?;
    let q = engine::imaging::quantize_with(&image.inner, levels, cfg.quantize).map_err(err)?;
    Ok(engine::glcm::glcm_features(&q, &cfg).map_err(err)?.values)
}

/// Normalized intensity histogram with `bins` equal-width bins.
#[pyfunction]
#[pyo3(signature = (image, bins=16))]
fn histogram_features(image: &PyGrayImage, bins: usize) -> PyResult<Vec<f64>> {
    let h = engine::histogram::histogram(&image.inner, bins).map_err(err)?;
    Ok(engine::histogram::hist_features(&h).map_err(err)?.values)
}

/// Full feature vector (GLCM block then histogram block) for a config
/// given as TOML text; `None` uses the defaults.
#[pyfunction]
#[pyo3(signature = (image, config_toml=None))]
fn extract_image_features(image: &PyGrayImage, config_toml: Option<&str>) -> PyResult<Vec<f64>> {
    let cfg = load_config(config_toml)?;
    engine::pipeline::extract_image_features(&image.inner, &cfg).map_err(err)
}

fn load_config(text: Option<&str>) -> PyResult<PipelineConfig> {
    match text {
        Some(t) => PipelineConfig::from_toml(t).map_err(err),
        None => Ok(PipelineConfig::default()),
    }
}

/// One of `rf`, `svm`, `knn`, `nb`, `dt` after fitting.
#[pyclass(name = "TrainedModel", module = "texture_ensemble", frozen)]
struct PyTrainedModel {
    inner: engine::TrainedModel,
}

#[pymethods]
impl PyTrainedModel {
    /// Fits a model. Hyperparameters come from `params_toml`, a TOML
    /// document shaped like the `[classifiers]` table of a pipeline config.
    #[staticmethod]
    #[pyo3(signature = (algorithm, x, y, seed=42, tau=0.0, schema_id="", params_toml=None))]
    fn fit(
        algorithm: &str,
        x: Vec<Vec<f64>>,
        y: Vec<usize>,
        seed: u64,
        tau: f64,
        schema_id: &str,
        params_toml: Option<&str>,
    ) -> PyResult<Self> {
        let alg = parse_algorithm(algorithm)?;
        let params: ClassifierParams = match params_toml {
            Some(t) => PipelineConfig::from_toml(&format!("[classifiers]\n{t}")).map_err(err)?.classifiers,
            None => ClassifierParams::default(),
        };
        let inner =
            engine::TrainedModel::fit(alg, &params, &x, &y, &SeedTree::new(seed), schema_id, tau).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, expected_schema=None))]
    fn load(path: PathBuf, expected_schema: Option<&str>) -> PyResult<Self> {
        Ok(Self { inner: engine::pipeline::load_model(path, expected_schema).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (text, expected_schema=None))]
    fn from_json(text: &str, expected_schema: Option<&str>) -> PyResult<Self> {
        Ok(Self { inner: engine::pipeline::model_from_str(text, expected_schema).map_err(err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        engine::pipeline::save_model(&self.inner, path).map_err(err)
    }

    fn to_json(&self) -> String {
        engine::pipeline::model_to_string(&self.inner)
    }

    #[getter]
    fn algorithm(&self) -> &'static str {
        self.inner.algorithm().id()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features
    }

    #[getter]
    fn classes(&self) -> Vec<usize> {
        self.inner.classes().to_vec()
    }

    /// `(label or None, confidence)` with the τ threshold applied.
    fn predict(&self, x: Vec<f64>) -> PyResult<PyPrediction> {
        Ok(to_py(self.inner.predict(&x).map_err(err)?))
    }

    fn predict_batch(&self, xs: Vec<Vec<f64>>) -> PyResult<Vec<PyPrediction>> {
        Ok(self.inner.predict_batch(&xs).map_err(err)?.into_iter().map(to_py).collect())
    }

    fn __repr__(&self) -> String {
        format!("TrainedModel({}, tau={})", self.inner.algorithm().id(), self.inner.tau)
    }
}

fn matrix(rows: Vec<Vec<PyPrediction>>) -> PredictionMatrix {
    let n = rows.first().map_or(0, Vec::len);
    let order = Algorithm::ALL.iter().copied().cycle().take(n).collect();
    PredictionMatrix::new(order, rows.into_iter().map(|r| r.into_iter().map(from_py).collect()).collect())
}

/// Majority vote per row; rows list one prediction per model.
#[pyfunction]
fn voting_ensemble(rows: Vec<Vec<PyPrediction>>) -> PyResult<Vec<PyPrediction>> {
    Ok(engine::voting_ensemble(&matrix(rows)).map_err(err)?.into_iter().map(to_py).collect())
}

/// First non-Unknown prediction per row in model order.
#[pyfunction]
#[pyo3(signature = (rows, strict=false))]
fn combined_classifier(rows: Vec<Vec<PyPrediction>>, strict: bool) -> PyResult<Vec<PyPrediction>> {
    let pm = matrix(rows);
    let out = if strict {
        engine::ensemble::combined_classifier_strict(&pm)
    } else {
        engine::combined_classifier(&pm)
    };
    Ok(out.map_err(err)?.into_iter().map(to_py).collect())
}

/// Confusion matrix and metric report as a dict. `None` predictions are
/// Unknown.
#[pyfunction]
fn evaluate<'py>(
    py: Python<'py>,
    y_true: Vec<usize>,
    y_pred: Vec<Option<usize>>,
    classes: Vec<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let pred: Vec<Label> = y_pred.into_iter().map(|p| p.map_or(Label::Unknown, Label::Class)).collect();
    let cm = engine::confusion(&y_true, &pred, &classes).map_err(err)?;
    let m = engine::metrics(&cm).map_err(err)?;
    let doc = serde_json::json!({ "confusion": cm, "metrics": m });
    json_to_py(py, &doc.to_string())
}

/// Runs the whole pipeline on a manifest and returns the result document.
#[pyfunction]
#[pyo3(signature = (manifest_path, config_toml=None, seed=None, skip_bad=false))]
fn run_experiment<'py>(
    py: Python<'py>,
    manifest_path: PathBuf,
    config_toml: Option<&str>,
    seed: Option<u64>,
    skip_bad: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = load_config(config_toml)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let result = py
        .detach(|| {
            let manifest = DatasetManifest::load(&manifest_path)?;
            engine::pipeline::run_experiment(&manifest, &cfg, ExtractOptions { skip_bad })
        })
        .map_err(err)?;
    json_to_py(py, &result.result.to_json())
}

/// Writes the synthetic benchmark under `directory` and returns the
/// manifest path.
#[pyfunction]
#[pyo3(signature = (directory, per_class=100, size=64, seed=42))]
fn write_benchmark(directory: PathBuf, per_class: usize, size: usize, seed: u64) -> PyResult<PathBuf> {
    engine::synth::write_benchmark(directory, BenchmarkSpec { per_class, size, seed }).map_err(err)
}

/// TOML text of the benchmark pipeline config.
#[pyfunction]
fn benchmark_config() -> String {
    engine::synth::benchmark_config().to_toml()
}

#[pymodule]
fn texture_ensemble(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TextureError", m.py().get_type::<TextureError>())?;
    m.add_class::<PyGrayImage>()?;
    m.add_class::<PyTrainedModel>()?;
    m.add_function(wrap_pyfunction!(glcm_features, m)?)?;
    m.add_function(wrap_pyfunction!(histogram_features, m)?)?;
    m.add_function(wrap_pyfunction!(extract_image_features, m)?)?;
    m.add_function(wrap_pyfunction!(voting_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(combined_classifier, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(write_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(benchmark_config, m)?)?;
    Ok(())
}
