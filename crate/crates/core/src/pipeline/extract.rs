use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::{DatasetManifest, PipelineConfig, PipelineError};
use crate::features::FeatureSchema;
use crate::glcm::glcm_features;
use crate::histogram::{hist_features, histogram};
use crate::imaging::{load_image, quantize_with, resize, GrayImage};

const CACHE_MAGIC: &str = "# texture-ensemble feature cache v1";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtractOptions {
    /// Skip unreadable images instead of failing the whole run.
    pub skip_bad: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedImage {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
}

/// One feature row per image, in manifest order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub schema: FeatureSchema,
    /// Extraction fingerprint of the config that produced the rows.
    pub fingerprint: String,
    pub paths: Vec<String>,
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sorted distinct labels and each row's dense class id.
    pub fn class_ids(&self) -> (Vec<String>, Vec<usize>) {
        let mut names = self.labels.clone();
        names.sort();
        names.dedup();
        let ids = self.labels.iter().map(|l| names.binary_search(l).expect("present")).collect();
        (names, ids)
    }

    /// CSV with a leading comment carrying the fingerprints, then a
    /// `path,label,<feature names>` header.
    pub fn to_csv(&self, manifest_digest: &str) -> Result<String, PipelineError> {
        let mut out = format!(
            "{CACHE_MAGIC} fingerprint={} schema={} manifest={manifest_digest}\n",
            self.fingerprint, self.schema.fingerprint
        );
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = vec!["path".to_string(), "label".to_string()];
        header.extend(self.schema.names.iter().cloned());
        w.write_record(&header)?;
        for ((p, l), row) in self.paths.iter().zip(&self.labels).zip(&self.rows) {
            let mut rec = vec![p.clone(), l.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        let body = w.into_inner().map_err(|e| PipelineError::Cache(e.to_string()))?;
        out.push_str(std::str::from_utf8(&body).map_err(|e| PipelineError::Cache(e.to_string()))?);
        Ok(out)
    }

    /// Parses a cache file; returns the table and its manifest digest.
    pub fn from_csv(text: &str, schema: &FeatureSchema) -> Result<(Self, String), PipelineError> {
        let (first, body) = text.split_once('\n').ok_or_else(|| PipelineError::Cache("empty file".into()))?;
        let meta = first
            .strip_prefix(CACHE_MAGIC)
            .ok_or_else(|| PipelineError::Cache("missing cache header".into()))?;
        let field = |key: &str| {
            meta.split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                .map(str::to_string)
                .ok_or_else(|| PipelineError::Cache(format!("header lacks {key}")))
        };
        let fingerprint = field("fingerprint")?;
        let manifest = field("manifest")?;
        if field("schema")? != schema.fingerprint {
            return Err(PipelineError::Cache("schema fingerprint differs".into()));
        }
        let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let headers = reader.headers()?.clone();
        let names: Vec<&str> = headers.iter().skip(2).collect();
        if names != schema.names.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(PipelineError::Cache("column names differ from schema".into()));
        }
        let mut table = FeatureTable {
            schema: schema.clone(),
            fingerprint,
            paths: Vec::new(),
            labels: Vec::new(),
            rows: Vec::new(),
        };
        for rec in reader.records() {
            let rec = rec?;
            table.paths.push(rec[0].to_string());
            table.labels.push(rec[1].to_string());
            let row = rec
                .iter()
                .skip(2)
                .map(|v| v.parse::<f64>().map_err(|e| PipelineError::Cache(format!("bad value {v:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            table.rows.push(row);
        }
        Ok((table, manifest))
    }
}

/// resize → (quantize → GLCM features) ∥ (histogram → normalized bins).
pub fn extract_image_features(img: &GrayImage, cfg: &PipelineConfig) -> Result<Vec<f64>, PipelineError> {
    let resized = resize(img, cfg.resize[0], cfg.resize[1])?;
    let quantized = quantize_with(&resized, cfg.glcm.levels, cfg.glcm.quantize)?;
    let glcm = glcm_features(&quantized, &cfg.glcm)?;
    let hist = hist_features(&histogram(&resized, cfg.hist_bins)?)?;
    let mut values = glcm.values;
    values.extend(hist.values);
    Ok(values)
}

/// Extracts features from in-memory images.
pub fn features_from_images(
    images: &[(String, GrayImage, String)],
    cfg: &PipelineConfig,
) -> Result<FeatureTable, PipelineError> {
    cfg.validate()?;
    let rows = images
        .par_iter()
        .map(|(_, img, _)| extract_image_features(img, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureTable {
        schema: cfg.feature_schema(),
        fingerprint: cfg.extraction_fingerprint(),
        paths: images.iter().map(|(p, _, _)| p.clone()).collect(),
        labels: images.iter().map(|(_, _, l)| l.clone()).collect(),
        rows,
    })
}

pub fn extract_features(
    manifest: &DatasetManifest,
    cfg: &PipelineConfig,
    opts: ExtractOptions,
) -> Result<(FeatureTable, Vec<SkippedImage>), PipelineError> {
    cfg.validate()?;
    let results: Vec<Result<Vec<f64>, PipelineError>> = manifest
        .entries()
        .par_iter()
        .map(|e| {
            let img = load_image(&e.resolved)
                .map_err(|source| PipelineError::Image { path: e.resolved.clone(), source })?;
            extract_image_features(&img, cfg).map_err(|err| PipelineError::ImageFeatures {
                path: e.resolved.clone(),
                source: Box::new(err),
            })
        })
        .collect();

    let mut table = FeatureTable {
        schema: cfg.feature_schema(),
        fingerprint: cfg.extraction_fingerprint(),
        paths: Vec::new(),
        labels: Vec::new(),
        rows: Vec::new(),
    };
    let mut skipped = Vec::new();
    for (entry, res) in manifest.entries().iter().zip(results) {
        match res {
            Ok(row) => {
                table.paths.push(entry.path.clone());
                table.labels.push(entry.label.clone());
                table.rows.push(row);
            }
            Err(err) if opts.skip_bad => {
                log::warn!("skipping {}: {err}", entry.path);
                skipped.push(SkippedImage { path: entry.path.clone(), reason: err.to_string() });
            }
            Err(err) => return Err(err),
        }
    }
    Ok((table, skipped))
}

/// Reuses `cache_path` when its fingerprints match `cfg` and `manifest`;
/// otherwise extracts and rewrites it.
pub fn extract_features_cached(
    manifest: &DatasetManifest,
    cfg: &PipelineConfig,
    opts: ExtractOptions,
    cache_path: impl AsRef<Path>,
) -> Result<(FeatureTable, CacheStatus, Vec<SkippedImage>), PipelineError> {
    let cache_path = cache_path.as_ref();
    let digest = manifest.digest();
    if let Ok(text) = fs::read_to_string(cache_path) {
        match FeatureTable::from_csv(&text, &cfg.feature_schema()) {
            Ok((table, cached_digest))
                if table.fingerprint == cfg.extraction_fingerprint() && cached_digest == digest =>
            {
                return Ok((table, CacheStatus::Hit, Vec::new()));
            }
            Ok(_) => log::info!("feature cache {} is stale", cache_path.display()),
            Err(e) => log::info!("ignoring feature cache {}: {e}", cache_path.display()),
        }
    }
    let (table, skipped) = extract_features(manifest, cfg, opts)?;
    fs::write(cache_path, table.to_csv(&digest)?)?;
    Ok((table, CacheStatus::Miss, skipped))
}
