use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use super::PipelineError;
use crate::features::fingerprint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path exactly as written in the manifest.
    pub path: String,
    /// `path` resolved against the manifest's directory.
    pub resolved: PathBuf,
    pub label: String,
}

/// Labeled image list read from a `path,label` CSV. Class ids are dense
/// and follow the sorted order of the label strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
    class_names: Vec<String>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self, PipelineError> {
        let mut paths = BTreeSet::new();
        for e in &entries {
            if !paths.insert(e.resolved.clone()) {
                return Err(PipelineError::Manifest(format!("duplicate path {}", e.path)));
            }
        }
        let class_names: Vec<String> =
            entries.iter().map(|e| e.label.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        if class_names.len() < 2 {
            return Err(PipelineError::Manifest(format!(
                "need at least 2 distinct classes, found {}",
                class_names.len()
            )));
        }
        Ok(Self { entries, class_names })
    }

    /// Entries whose paths are already usable as given.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (PathBuf, String)>) -> Result<Self, PipelineError> {
        Self::new(
            pairs
                .into_iter()
                .map(|(p, label)| ManifestEntry { path: p.display().to_string(), resolved: p, label })
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "path" || &headers[1] != "label" {
            return Err(PipelineError::Manifest(format!(
                "expected header `path,label`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut entries = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            let (p, label) = (record[0].trim(), record[1].trim());
            if p.is_empty() || label.is_empty() {
                return Err(PipelineError::Manifest(format!("row {} has an empty field", line + 2)));
            }
            entries.push(ManifestEntry {
                path: p.to_string(),
                resolved: base.join(p),
                label: label.to_string(),
            });
        }
        Self::new(entries)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["path", "label"]).expect("in-memory write");
        for e in &self.entries {
            w.write_record([e.path.as_str(), e.label.as_str()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PipelineError> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_id(&self, label: &str) -> Option<usize> {
        self.class_names.binary_search_by(|c| c.as_str().cmp(label)).ok()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.entries.iter().map(|e| self.class_id(&e.label).expect("label in class map")).collect()
    }

    /// Hash over the (path, label) rows.
    pub fn digest(&self) -> String {
        fingerprint(self.to_csv().as_bytes())
    }
}
