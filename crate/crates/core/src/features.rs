//! Feature vectors and the schema that names their columns.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Stable 64-bit hex fingerprint of arbitrary bytes (truncated SHA-256).
pub fn fingerprint(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Ordered column names plus a fingerprint of the configuration that
/// produced them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub names: Vec<String>,
    pub fingerprint: String,
}

impl FeatureSchema {
    /// Builds a schema whose fingerprint covers the column names and a
    /// canonical description of the extraction settings.
    pub fn new(names: Vec<String>, descriptor: &str) -> Self {
        let mut canon = String::from(descriptor);
        for n in &names {
            canon.push('\n');
            canon.push_str(n);
        }
        let fingerprint = fingerprint(canon.as_bytes());
        Self { names, fingerprint }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Schema of `self` followed by `other`.
    pub fn concat(&self, other: &FeatureSchema) -> FeatureSchema {
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        let descriptor = format!("concat({},{})", self.fingerprint, other.fingerprint);
        FeatureSchema::new(names, &descriptor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub schema_id: String,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, schema: &FeatureSchema) -> Self {
        debug_assert_eq!(values.len(), schema.len());
        Self { values, schema_id: schema.fingerprint.clone() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn concat(&self, other: &FeatureVector, schema: &FeatureSchema) -> FeatureVector {
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        FeatureVector::new(values, schema)
    }
}
