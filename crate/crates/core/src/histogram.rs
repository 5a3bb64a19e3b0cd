//! Intensity histograms over the fixed `[0, 255]` range.

use thiserror::Error;

use crate::features::{FeatureSchema, FeatureVector};
use crate::imaging::GrayImage;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HistogramError {
    #[error("bin count {0} not in 1..=256")]
    InvalidBinCount(usize),
    #[error("histogram has no counts")]
    EmptyHistogram,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    bins: Vec<u64>,
    range: (u8, u8),
}

impl Histogram {
    pub fn from_bins(bins: Vec<u64>) -> Result<Self, HistogramError> {
        if bins.is_empty() || bins.len() > 256 {
            return Err(HistogramError::InvalidBinCount(bins.len()));
        }
        Ok(Self { bins, range: (0, 255) })
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn range(&self) -> (u8, u8) {
        self.range
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

/// Pixel `p` lands in bin `floor(p * N / 256)`.
pub fn histogram(img: &GrayImage, bin_count: usize) -> Result<Histogram, HistogramError> {
    if !(1..=256).contains(&bin_count) {
        return Err(HistogramError::InvalidBinCount(bin_count));
    }
    let mut bins = vec![0u64; bin_count];
    for &p in img.data() {
        bins[p as usize * bin_count / 256] += 1;
    }
    Histogram::from_bins(bins)
}

pub fn schema(bin_count: usize) -> FeatureSchema {
    let names = (0..bin_count).map(|b| format!("hist_bin{b:03}")).collect();
    FeatureSchema::new(names, &format!("hist;bins={bin_count};range=0:255;norm=pixel_count"))
}

/// Bin counts divided by the pixel total.
pub fn hist_features(h: &Histogram) -> Result<FeatureVector, HistogramError> {
    let total = h.total();
    if total == 0 {
        return Err(HistogramError::EmptyHistogram);
    }
    let t = total as f64;
    let values = h.bins.iter().map(|&c| c as f64 / t).collect();
    Ok(FeatureVector::new(values, &schema(h.bin_count())))
}
