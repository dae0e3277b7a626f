use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

pub const DEFAULT_DIM: usize = 1 << 15;

/// Hashed bag-of-words settings: lowercase tokens split on anything that is
/// not alphanumeric, FNV-1a hashed into `dim` buckets, term-frequency counts,
/// L2-normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub dim: usize,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec { dim: DEFAULT_DIM }
    }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .map(|&i| i as usize)
            .zip(self.values.iter().copied())
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

pub fn hash_token(token: &str, dim: usize) -> u32 {
    let mut hasher = FnvHasher::default();
    hasher.write(token.as_bytes());
    (hasher.finish() % dim as u64) as u32
}

pub fn featurize(text: &str, spec: &FeatureSpec) -> SparseVector {
    let mut buckets: Vec<u32> = tokenize(text).map(|t| hash_token(&t, spec.dim)).collect();
    if buckets.is_empty() {
        return SparseVector::default();
    }
    buckets.sort_unstable();
    let mut indices = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for b in buckets {
        if indices.last() == Some(&b) {
            *values.last_mut().expect("parallel vectors") += 1.0;
        } else {
            indices.push(b);
            values.push(1.0);
        }
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    values.iter_mut().for_each(|v| *v /= norm);
    SparseVector { indices, values }
}
