//! Seeded 4-class synthetic texture benchmark.
//!
//! | id | label        | texture                                   |
//! |----|--------------|-------------------------------------------|
//! | 0  | `0_noise`    | flat field plus low-variance Gaussian noise |
//! | 1  | `1_vstripes` | vertical stripes, period 4                |
//! | 2  | `2_hstripes` | horizontal stripes, period 4              |
//! | 3  | `3_checker`  | checkerboard, period 2                    |
//!
//! Image `i` of class `c` draws from `rng("synth-image", c * per_class + i)`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::glcm::Aggregation;
use crate::imaging::{save_pgm, GrayImage};
use crate::pipeline::{DatasetManifest, PipelineConfig, PipelineError};
use crate::seed::{SeedTree, SplitMix64};

pub const CLASS_NAMES: [&str; 4] = ["0_noise", "1_vstripes", "2_hstripes", "3_checker"];
pub const DEFAULT_PER_CLASS: usize = 100;
pub const DEFAULT_SIZE: usize = 64;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkSpec {
    pub per_class: usize,
    pub size: usize,
    pub seed: u64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self { per_class: DEFAULT_PER_CLASS, size: DEFAULT_SIZE, seed: DEFAULT_SEED }
    }
}

fn clamp_px(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// One image of `class` (0..4).
pub fn texture_image(class: usize, size: usize, rng: &mut SplitMix64) -> GrayImage {
    match class {
        0 => {
            let base = rng.range_f64(60.0, 196.0);
            GrayImage::from_fn(size, size, |_, _| clamp_px(base + 6.0 * rng.normal())).expect("positive size")
        }
        1 | 2 => {
            let lo = rng.range_f64(30.0, 110.0);
            let hi = lo + rng.range_f64(60.0, 120.0);
            let phase = rng.below(4) as usize;
            GrayImage::from_fn(size, size, |x, y| {
                let t = if class == 1 { x } else { y };
                let v = if (t + phase) % 4 < 2 { hi } else { lo };
                clamp_px(v + 10.0 * rng.normal())
            })
            .expect("positive size")
        }
        3 => {
            let lo = rng.range_f64(30.0, 110.0);
            let hi = lo + rng.range_f64(60.0, 120.0);
            let phase = rng.below(2) as usize;
            GrayImage::from_fn(size, size, |x, y| {
                let v = if (x + y + phase).is_multiple_of(2) { hi } else { lo };
                clamp_px(v + 10.0 * rng.normal())
            })
            .expect("positive size")
        }
        _ => panic!("benchmark has 4 classes, got class {class}"),
    }
}

/// `(file name, image, label)` triples, class-major.
pub fn generate(spec: BenchmarkSpec) -> Vec<(String, GrayImage, String)> {
    let seeds = SeedTree::new(spec.seed);
    let mut out = Vec::with_capacity(4 * spec.per_class);
    for (c, name) in CLASS_NAMES.iter().enumerate() {
        for i in 0..spec.per_class {
            let mut rng = seeds.rng("synth-image", (c * spec.per_class + i) as u64);
            let img = texture_image(c, spec.size, &mut rng);
            out.push((format!("{name}/img_{i:03}.pgm"), img, name.to_string()));
        }
    }
    out
}

/// Writes the images as PGM files plus `manifest.csv` under `dir` and
/// returns the manifest path.
pub fn write_benchmark(dir: impl AsRef<Path>, spec: BenchmarkSpec) -> Result<PathBuf, PipelineError> {
    let dir = dir.as_ref();
    let mut pairs = Vec::new();
    for (rel, img, label) in generate(spec) {
        let path = dir.join(&rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        save_pgm(&img, &path)?;
        pairs.push((PathBuf::from(rel), label));
    }
    let manifest = DatasetManifest::from_pairs(pairs)?;
    let manifest_path = dir.join("manifest.csv");
    manifest.save(&manifest_path)?;
    Ok(manifest_path)
}

/// Default pipeline settings with per-offset GLCM blocks, which keep
/// vertical and horizontal stripes apart.
pub fn benchmark_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.glcm.aggregation = Aggregation::Concatenate;
    cfg.seed = DEFAULT_SEED;
    cfg
}
