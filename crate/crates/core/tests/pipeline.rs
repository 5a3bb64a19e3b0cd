use std::fs;
use std::path::Path;

use texture_ensemble::classifiers::{Algorithm, Label};
use texture_ensemble::imaging::{save_pgm, GrayImage};
use texture_ensemble::pipeline::{
    extract_features, extract_features_cached, features_from_images, run_on_table, CacheStatus, DatasetManifest,
    ExtractOptions, PipelineConfig, PipelineError,
};
use texture_ensemble::synth::{benchmark_config, generate, write_benchmark, BenchmarkSpec};

fn three_image_manifest(dir: &Path) -> DatasetManifest {
    let imgs = [
        ("a.pgm", GrayImage::from_fn(20, 20, |x, _| (x * 12) as u8).unwrap(), "grad"),
        ("b.pgm", GrayImage::from_fn(20, 20, |x, y| ((x + y) % 2 * 200) as u8).unwrap(), "check"),
        ("c.pgm", GrayImage::filled(20, 20, 90).unwrap(), "flat"),
    ];
    let mut text = String::from("path,label\n");
    for (name, img, label) in &imgs {
        save_pgm(img, dir.join(name)).unwrap();
        text.push_str(&format!("{name},{label}\n"));
    }
    fs::write(dir.join("manifest.csv"), text).unwrap();
    DatasetManifest::load(dir.join("manifest.csv")).unwrap()
}

#[test]
fn three_images_give_twenty_one_features() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = three_image_manifest(dir.path());
    let cfg = PipelineConfig::default();
    let (table, skipped) = extract_features(&manifest, &cfg, ExtractOptions::default()).unwrap();
    assert!(skipped.is_empty());
    assert_eq!(table.len(), 3);
    assert!(table.rows.iter().all(|r| r.len() == 21));
    assert_eq!(table.schema.len(), 21);
    assert_eq!(table.paths, vec!["a.pgm", "b.pgm", "c.pgm"]);
    assert!(table.schema.names[0].starts_with("glcm_"));
    assert!(table.schema.names[5].starts_with("hist_"));
}

#[test]
fn warm_cache_matches_cold_and_skips_image_io() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = three_image_manifest(dir.path());
    let cfg = PipelineConfig::default();
    let cache = dir.path().join("features.csv");

    let (cold, status, _) = extract_features_cached(&manifest, &cfg, ExtractOptions::default(), &cache).unwrap();
    assert_eq!(status, CacheStatus::Miss);
    let bytes = fs::read(&cache).unwrap();

    // Images are gone, so a hit must not touch them.
    for f in ["a.pgm", "b.pgm", "c.pgm"] {
        fs::remove_file(dir.path().join(f)).unwrap();
    }
    let (warm, status, _) = extract_features_cached(&manifest, &cfg, ExtractOptions::default(), &cache).unwrap();
    assert_eq!(status, CacheStatus::Hit);
    assert_eq!(warm, cold);
    assert_eq!(fs::read(&cache).unwrap(), bytes);

    // A different extraction setting is a miss and needs the images again.
    let mut other = cfg.clone();
    other.hist_bins = 8;
    let err = extract_features_cached(&manifest, &other, ExtractOptions::default(), &cache).unwrap_err();
    assert!(matches!(err, PipelineError::Image { .. }), "{err}");
}

#[test]
fn cache_round_trip_is_exact() {
    let images = generate(BenchmarkSpec { per_class: 3, size: 16, seed: 3 });
    let cfg = benchmark_config();
    let table = features_from_images(&images, &cfg).unwrap();
    let text = table.to_csv("digest").unwrap();
    let (back, digest) = texture_ensemble::pipeline::FeatureTable::from_csv(&text, &cfg.feature_schema()).unwrap();
    assert_eq!(digest, "digest");
    assert_eq!(back, table);
}

#[test]
fn bad_image_fails_fast_or_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = three_image_manifest(dir.path());
    fs::write(dir.path().join("b.pgm"), b"P5\n20 20\n255\n").unwrap();
    let cfg = PipelineConfig::default();

    let err = extract_features(&manifest, &cfg, ExtractOptions::default()).unwrap_err();
    assert!(err.to_string().contains("b.pgm"), "{err}");

    let (table, skipped) = extract_features(&manifest, &cfg, ExtractOptions { skip_bad: true }).unwrap();
    assert_eq!(table.paths, vec!["a.pgm", "c.pgm"]);
    assert_eq!(skipped.len(), 1);
    assert_eq!(skipped[0].path, "b.pgm");
}

fn small_table(cfg: &PipelineConfig) -> texture_ensemble::pipeline::FeatureTable {
    features_from_images(&generate(BenchmarkSpec { per_class: 15, size: 24, seed: 11 }), cfg).unwrap()
}

#[test]
fn cascade_equals_first_model_for_any_order() {
    let mut cfg = benchmark_config();
    cfg.resize = [24, 24];
    cfg.model_order = vec![Algorithm::Knn, Algorithm::NaiveBayes, Algorithm::RandomForest, Algorithm::Svm, Algorithm::DecisionTree];
    let out = run_on_table(&small_table(&cfg), &cfg).unwrap();
    let ids: Vec<&str> = out.result.results.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, vec!["knn", "nb", "rf", "svm", "dt", "ve", "cc"]);
    let first = out.result.get("knn").unwrap();
    let cc = out.result.get("cc").unwrap();
    assert_eq!(first.confusion, cc.confusion);
    assert_eq!(first.metrics, cc.metrics);
}

#[test]
fn experiment_is_deterministic_and_seed_sensitive() {
    let mut cfg = benchmark_config();
    cfg.resize = [24, 24];
    let table = small_table(&cfg);
    let a = run_on_table(&table, &cfg).unwrap().result.to_json();
    let b = run_on_table(&table, &cfg).unwrap().result.to_json();
    assert_eq!(a, b);
    cfg.seed = 43;
    let c = run_on_table(&table, &cfg).unwrap().result.to_json();
    assert_ne!(a, c);
}

#[test]
fn thresholds_produce_abstentions_and_cascade_falls_through() {
    let mut cfg = benchmark_config();
    cfg.resize = [24, 24];
    cfg.tau.rf = 1.0;
    cfg.tau.svm = 1.0;
    let table = small_table(&cfg);
    let out = run_on_table(&table, &cfg).unwrap();
    let svm_col = out.predictions.column(1);
    assert!(svm_col.iter().all(|p| p.label == Label::Unknown));
    // Rows where RF abstains are answered by k-NN, the next model to speak.
    let cc = texture_ensemble::ensemble::combined_classifier(&out.predictions).unwrap();
    for (row, p) in out.predictions.rows.iter().zip(&cc) {
        if row[0].label.is_unknown() {
            assert_eq!(*p, row[2]);
        }
    }
    assert!(out.result.get("svm").unwrap().confusion.has_unknown());
}

#[test]
fn stale_table_is_rejected() {
    let mut cfg = benchmark_config();
    cfg.resize = [24, 24];
    let table = small_table(&cfg);
    cfg.hist_bins = 8;
    assert!(matches!(run_on_table(&table, &cfg), Err(PipelineError::Config(_))));
}

#[test]
fn benchmark_on_disk_matches_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let spec = BenchmarkSpec { per_class: 4, size: 16, seed: 5 };
    let manifest = DatasetManifest::load(write_benchmark(dir.path(), spec).unwrap()).unwrap();
    let mut cfg = benchmark_config();
    cfg.resize = [16, 16];
    let (disk, _) = extract_features(&manifest, &cfg, ExtractOptions::default()).unwrap();
    let mem = features_from_images(&generate(spec), &cfg).unwrap();
    assert_eq!(disk.rows, mem.rows);
    assert_eq!(disk.labels, mem.labels);
}
