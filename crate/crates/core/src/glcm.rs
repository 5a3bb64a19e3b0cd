//! Gray-level co-occurrence matrices and the five texture statistics
//! computed from them: energy, contrast, homogeneity, entropy, correlation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureSchema, FeatureVector};
use crate::imaging::{QuantizeMode, QuantizedImage};

/// Below this product of marginal deviations correlation is reported as 0.
pub const DEGENERATE_SIGMA: f64 = 1e-12;

pub const FEATURE_NAMES: [&str; 5] = ["energy", "contrast", "homogeneity", "entropy", "correlation"];

#[derive(Debug, Error, PartialEq)]
pub enum GlcmError {
    #[error("offset ({dx},{dy}) leaves no pixel pair inside a {width}x{height} image")]
    NoValidPairs { dx: i32, dy: i32, width: usize, height: usize },
    #[error("offset (0,0) is not a displacement")]
    ZeroOffset,
    #[error("invalid GLCM config: {0}")]
    InvalidConfig(String),
    #[error("image has {image} gray levels but config expects {config}")]
    LevelMismatch { image: usize, config: usize },
}

/// Pixel displacement: `dx` columns right, `dy` rows down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i32; 2]", into = "[i32; 2]")]
pub struct Offset {
    dx: i32,
    dy: i32,
}

impl Offset {
    pub fn new(dx: i32, dy: i32) -> Result<Self, GlcmError> {
        if dx == 0 && dy == 0 {
            return Err(GlcmError::ZeroOffset);
        }
        Ok(Self { dx, dy })
    }

    pub fn dx(&self) -> i32 {
        self.dx
    }

    pub fn dy(&self) -> i32 {
        self.dy
    }

    pub fn scaled(&self, distance: u32) -> Offset {
        Offset { dx: self.dx * distance as i32, dy: self.dy * distance as i32 }
    }

    /// 0°, 45°, 90°, 135° in image coordinates (rows grow downward).
    pub fn standard_angles() -> Vec<Offset> {
        vec![
            Offset { dx: 1, dy: 0 },
            Offset { dx: 1, dy: -1 },
            Offset { dx: 0, dy: -1 },
            Offset { dx: -1, dy: -1 },
        ]
    }
}

impl TryFrom<[i32; 2]> for Offset {
    type Error = GlcmError;

    fn try_from(v: [i32; 2]) -> Result<Self, Self::Error> {
        Offset::new(v[0], v[1])
    }
}

impl From<Offset> for [i32; 2] {
    fn from(o: Offset) -> Self {
        [o.dx, o.dy]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Average each feature over all offsets (5 values).
    #[default]
    Mean,
    /// One block of 5 features per offset.
    Concatenate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlcmConfig {
    pub levels: usize,
    pub distance: u32,
    pub angles: Vec<Offset>,
    pub symmetric: bool,
    pub aggregation: Aggregation,
    pub quantize: QuantizeMode,
}

impl Default for GlcmConfig {
    fn default() -> Self {
        Self {
            levels: 16,
            distance: 1,
            angles: Offset::standard_angles(),
            symmetric: true,
            aggregation: Aggregation::Mean,
            quantize: QuantizeMode::Uniform,
        }
    }
}

impl GlcmConfig {
    pub fn validate(&self) -> Result<(), GlcmError> {
        if !(2..=256).contains(&self.levels) {
            return Err(GlcmError::InvalidConfig(format!("levels {} not in 2..=256", self.levels)));
        }
        if self.distance == 0 {
            return Err(GlcmError::InvalidConfig("distance must be >= 1".into()));
        }
        if self.angles.is_empty() {
            return Err(GlcmError::InvalidConfig("at least one offset is required".into()));
        }
        Ok(())
    }

    pub fn schema(&self) -> FeatureSchema {
        let names = match self.aggregation {
            Aggregation::Mean => FEATURE_NAMES.iter().map(|n| format!("glcm_{n}")).collect(),
            Aggregation::Concatenate => self
                .angles
                .iter()
                .flat_map(|o| {
                    FEATURE_NAMES
                        .iter()
                        .map(move |n| format!("glcm_{n}_dx{}_dy{}", o.dx, o.dy))
                })
                .collect(),
        };
        let angles: Vec<String> = self.angles.iter().map(|o| format!("{}:{}", o.dx, o.dy)).collect();
        let descriptor = format!(
            "glcm;levels={};distance={};angles={};symmetric={};aggregation={:?};quantize={:?};entropy_log=2",
            self.levels,
            self.distance,
            angles.join("|"),
            self.symmetric,
            self.aggregation,
            self.quantize,
        );
        FeatureSchema::new(names, &descriptor)
    }
}

/// Normalized co-occurrence probabilities, row index = reference pixel level.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix {
    levels: usize,
    probs: Vec<f64>,
    pair_count: u64,
}

impl CooccurrenceMatrix {
    /// Normalizes a raw `levels x levels` count table.
    pub fn from_counts(levels: usize, counts: &[u64]) -> Self {
        assert_eq!(counts.len(), levels * levels);
        let total: u64 = counts.iter().sum();
        let probs = if total == 0 {
            vec![0.0; counts.len()]
        } else {
            let t = total as f64;
            counts.iter().map(|&c| c as f64 / t).collect()
        };
        Self { levels, probs, pair_count: total }
    }

    /// Wraps an already-normalized probability table.
    pub fn from_probs(levels: usize, probs: Vec<f64>) -> Self {
        assert_eq!(probs.len(), levels * levels);
        Self { levels, probs, pair_count: 0 }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn pair_count(&self) -> u64 {
        self.pair_count
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.levels + j]
    }

    fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let g = self.levels;
        self.probs
            .iter()
            .enumerate()
            .map(move |(k, &p)| ((k / g) as f64, (k % g) as f64, p))
    }
}

/// Counts every in-bounds pair `(p, p + off)`; `symmetric` also counts
/// the reversed pair.
pub fn cooccurrence(
    img: &QuantizedImage,
    off: Offset,
    symmetric: bool,
) -> Result<CooccurrenceMatrix, GlcmError> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let (dx, dy) = (off.dx as i64, off.dy as i64);
    if dx.abs() >= w || dy.abs() >= h {
        return Err(GlcmError::NoValidPairs {
            dx: off.dx,
            dy: off.dy,
            width: img.width(),
            height: img.height(),
        });
    }
    let g = img.levels();
    let data = img.data();
    let mut counts = vec![0u64; g * g];
    let (x_lo, x_hi) = ((-dx).max(0), w - dx.max(0));
    let (y_lo, y_hi) = ((-dy).max(0), h - dy.max(0));
    for y in y_lo..y_hi {
        let row = (y * w) as usize;
        let nrow = ((y + dy) * w) as usize;
        for x in x_lo..x_hi {
            let a = data[row + x as usize] as usize;
            let b = data[nrow + (x + dx) as usize] as usize;
            counts[a * g + b] += 1;
            if symmetric {
                counts[b * g + a] += 1;
            }
        }
    }
    Ok(CooccurrenceMatrix::from_counts(g, &counts))
}

pub fn energy(p: &CooccurrenceMatrix) -> f64 {
    p.probs.iter().map(|v| v * v).sum()
}

pub fn contrast(p: &CooccurrenceMatrix) -> f64 {
    p.cells().map(|(i, j, v)| (i - j) * (i - j) * v).sum()
}

pub fn homogeneity(p: &CooccurrenceMatrix) -> f64 {
    p.cells().map(|(i, j, v)| v / (1.0 + (i - j) * (i - j))).sum()
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(p: &CooccurrenceMatrix) -> f64 {
    -p.probs.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalStats {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

pub fn marginals(p: &CooccurrenceMatrix) -> MarginalStats {
    let g = p.levels;
    let mut px = vec![0.0; g];
    let mut py = vec![0.0; g];
    for (i, px_i) in px.iter_mut().enumerate() {
        for (j, py_j) in py.iter_mut().enumerate() {
            let v = p.get(i, j);
            *px_i += v;
            *py_j += v;
        }
    }
    let moments = |m: &[f64]| {
        let mu: f64 = m.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
        let var: f64 = m.iter().enumerate().map(|(i, v)| (i as f64 - mu).powi(2) * v).sum();
        (mu, var.sqrt())
    };
    let (mu_x, sigma_x) = moments(&px);
    let (mu_y, sigma_y) = moments(&py);
    MarginalStats { mu_x, mu_y, sigma_x, sigma_y }
}

pub fn correlation(p: &CooccurrenceMatrix) -> f64 {
    let m = marginals(p);
    let denom = m.sigma_x * m.sigma_y;
    if denom < DEGENERATE_SIGMA {
        return 0.0;
    }
    let cross: f64 = p.cells().map(|(i, j, v)| i * j * v).sum();
    (cross - m.mu_x * m.mu_y) / denom
}

/// `[energy, contrast, homogeneity, entropy, correlation]` of one matrix.
pub fn texture_features(p: &CooccurrenceMatrix) -> [f64; 5] {
    [energy(p), contrast(p), homogeneity(p), entropy(p), correlation(p)]
}

pub fn glcm_features(img: &QuantizedImage, cfg: &GlcmConfig) -> Result<FeatureVector, GlcmError> {
    cfg.validate()?;
    if img.levels() != cfg.levels {
        return Err(GlcmError::LevelMismatch { image: img.levels(), config: cfg.levels });
    }
    let mut per_offset = Vec::with_capacity(cfg.angles.len());
    for off in &cfg.angles {
        let m = cooccurrence(img, off.scaled(cfg.distance), cfg.symmetric)?;
        per_offset.push(texture_features(&m));
    }
    let values = match cfg.aggregation {
        Aggregation::Concatenate => per_offset.iter().flatten().copied().collect(),
        Aggregation::Mean => {
            let n = per_offset.len() as f64;
            (0..5)
                .map(|k| per_offset.iter().map(|f| f[k]).sum::<f64>() / n)
                .collect()
        }
    };
    Ok(FeatureVector::new(values, &cfg.schema()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn q(w: usize, h: usize, levels: usize, data: &[u8]) -> QuantizedImage {
        QuantizedImage::new(w, h, levels, data.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= EPS
    }

    fn diag_half() -> CooccurrenceMatrix {
        CooccurrenceMatrix::from_probs(2, vec![0.5, 0.0, 0.0, 0.5])
    }

    fn anti_half() -> CooccurrenceMatrix {
        CooccurrenceMatrix::from_probs(2, vec![0.0, 0.5, 0.5, 0.0])
    }

    fn uniform4() -> CooccurrenceMatrix {
        CooccurrenceMatrix::from_probs(2, vec![0.25; 4])
    }

    fn point_mass(levels: usize, c: usize) -> CooccurrenceMatrix {
        let mut p = vec![0.0; levels * levels];
        p[c * levels + c] = 1.0;
        CooccurrenceMatrix::from_probs(levels, p)
    }

    #[test]
    fn cooccurrence_examples() {
        let rows = q(2, 2, 2, &[0, 0, 1, 1]);
        let m = cooccurrence(&rows, Offset::new(1, 0).unwrap(), true).unwrap();
        assert_eq!(m.probs(), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(m.pair_count(), 4);

        let checker = q(2, 2, 2, &[0, 1, 1, 0]);
        let m = cooccurrence(&checker, Offset::new(1, 0).unwrap(), true).unwrap();
        assert_eq!(m.probs(), &[0.0, 0.5, 0.5, 0.0]);

        let flat = q(3, 3, 4, &[2; 9]);
        for (dx, dy) in [(1, 0), (0, -1), (-2, 2), (1, 1)] {
            let m = cooccurrence(&flat, Offset::new(dx, dy).unwrap(), false).unwrap();
            assert_eq!(m.get(2, 2), 1.0);
            assert_eq!(m.probs().iter().filter(|&&v| v != 0.0).count(), 1);
        }
    }

    #[test]
    fn asymmetric_counts_direction() {
        // 0 -> 1 horizontally only.
        let img = q(2, 1, 2, &[0, 1]);
        let m = cooccurrence(&img, Offset::new(1, 0).unwrap(), false).unwrap();
        assert_eq!(m.probs(), &[0.0, 1.0, 0.0, 0.0]);
        let m = cooccurrence(&img, Offset::new(-1, 0).unwrap(), false).unwrap();
        assert_eq!(m.probs(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn oversized_offset_has_no_pairs() {
        let img = q(2, 2, 2, &[0, 1, 1, 0]);
        assert!(matches!(
            cooccurrence(&img, Offset::new(2, 0).unwrap(), true),
            Err(GlcmError::NoValidPairs { .. })
        ));
        assert!(matches!(
            cooccurrence(&img, Offset::new(1, -2).unwrap(), true),
            Err(GlcmError::NoValidPairs { .. })
        ));
        assert_eq!(Offset::new(0, 0), Err(GlcmError::ZeroOffset));
    }

    #[test]
    fn energy_examples() {
        assert!(close(energy(&point_mass(4, 1)), 1.0));
        assert!(close(energy(&diag_half()), 0.5));
        assert!(close(energy(&uniform4()), 0.25));
    }

    #[test]
    fn contrast_examples() {
        assert!(close(contrast(&point_mass(4, 3)), 0.0));
        assert!(close(contrast(&anti_half()), 1.0));
        assert!(close(contrast(&diag_half()), 0.0));
    }

    #[test]
    fn homogeneity_examples() {
        assert!(close(homogeneity(&point_mass(4, 0)), 1.0));
        assert!(close(homogeneity(&anti_half()), 0.5));
        assert!(close(homogeneity(&diag_half()), 1.0));
    }

    #[test]
    fn entropy_examples() {
        assert!(close(entropy(&point_mass(8, 5)), 0.0));
        assert!(close(entropy(&diag_half()), 1.0));
        assert!(close(entropy(&uniform4()), 2.0));
    }

    #[test]
    fn marginal_examples() {
        let m = marginals(&diag_half());
        for v in [m.mu_x, m.mu_y, m.sigma_x, m.sigma_y] {
            assert!(close(v, 0.5));
        }
        let m = marginals(&point_mass(6, 4));
        assert!(close(m.mu_x, 4.0) && close(m.mu_y, 4.0));
        assert!(close(m.sigma_x, 0.0) && close(m.sigma_y, 0.0));
        let m = marginals(&anti_half());
        assert!(close(m.mu_x, 0.5) && close(m.sigma_x, 0.5));
    }

    #[test]
    fn correlation_examples() {
        assert!(close(correlation(&diag_half()), 1.0));
        assert!(close(correlation(&anti_half()), -1.0));
        assert_eq!(correlation(&point_mass(16, 7)), 0.0);
    }

    fn stripes() -> QuantizedImage {
        QuantizedImage::new(6, 4, 2, (0..24).map(|k| (k % 6 % 2) as u8).collect()).unwrap()
    }

    fn cfg_with(angles: &[(i32, i32)]) -> GlcmConfig {
        GlcmConfig {
            levels: 2,
            angles: angles.iter().map(|&(dx, dy)| Offset::new(dx, dy).unwrap()).collect(),
            ..GlcmConfig::default()
        }
    }

    fn assert_features(got: &FeatureVector, expect: [f64; 5]) {
        for (g, e) in got.values.iter().zip(expect) {
            assert!(close(*g, e), "got {:?}, expected {:?}", got.values, expect);
        }
    }

    #[test]
    fn constant_image_features() {
        let img = q(8, 8, 16, &[11; 64]);
        let fv = glcm_features(&img, &GlcmConfig::default()).unwrap();
        assert_features(&fv, [1.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn stripe_image_features() {
        let fv = glcm_features(&stripes(), &cfg_with(&[(1, 0)])).unwrap();
        assert_features(&fv, [0.5, 1.0, 0.5, 1.0, -1.0]);
        // Along the stripes both levels occur, so the matrix is diag(0.5, 0.5).
        let fv = glcm_features(&stripes(), &cfg_with(&[(0, -1)])).unwrap();
        assert_features(&fv, [0.5, 0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn concatenate_layout() {
        let mut cfg = cfg_with(&[(1, 0), (0, -1)]);
        cfg.aggregation = Aggregation::Concatenate;
        let fv = glcm_features(&stripes(), &cfg).unwrap();
        assert_eq!(fv.len(), 10);
        assert_eq!(cfg.schema().names[5], "glcm_energy_dx0_dy-1");
        assert!(close(fv.values[1], 1.0));
        assert!(close(fv.values[6], 0.0));
    }

    #[test]
    fn config_validation() {
        let img = stripes();
        let mut cfg = cfg_with(&[(1, 0)]);
        cfg.levels = 4;
        assert_eq!(
            glcm_features(&img, &cfg),
            Err(GlcmError::LevelMismatch { image: 2, config: 4 })
        );
        let mut cfg = cfg_with(&[]);
        assert!(matches!(glcm_features(&img, &cfg), Err(GlcmError::InvalidConfig(_))));
        cfg = cfg_with(&[(1, 0)]);
        cfg.distance = 0;
        assert!(matches!(glcm_features(&img, &cfg), Err(GlcmError::InvalidConfig(_))));
        cfg.distance = 6;
        assert!(matches!(glcm_features(&img, &cfg), Err(GlcmError::NoValidPairs { .. })));
    }

    #[test]
    fn offsets_deserialize_from_pairs() {
        let cfg: GlcmConfig = toml::from_str("angles = [[1, 0], [0, -1]]").unwrap();
        assert_eq!(cfg.angles, vec![Offset::new(1, 0).unwrap(), Offset::new(0, -1).unwrap()]);
        assert!(toml::from_str::<GlcmConfig>("angles = [[0, 0]]").is_err());
    }
}
