//! Signed feature-hashing embedding over words and character n-grams.

use serde::{Deserialize, Serialize};

pub const DEFAULT_DIMENSION: usize = 64;
pub const MIN_NGRAM: usize = 3;
pub const MAX_NGRAM: usize = 5;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    /// L2 norm of `values`: 0 for the zero vector, otherwise 1 up to rounding.
    pub norm: f64,
}

impl EmbeddingVector {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.norm == 0.0
    }
}

/// The token itself followed by every 3-, 4- and 5-gram of `<token>`, by
/// length then position. Repeated n-grams are kept.
pub fn subword_features(token: &str) -> Vec<String> {
    let bounded: Vec<char> = format!("<{token}>").chars().collect();
    let mut out = vec![token.to_string()];
    for n in MIN_NGRAM..=MAX_NGRAM {
        out.extend(bounded.windows(n).map(|w| w.iter().collect::<String>()));
    }
    out
}

/// Embeds preprocessed tokens into `dimension` buckets, accumulating in
/// token order, then L2-normalizes.
pub fn embed<S: AsRef<str>>(tokens: &[S], dimension: usize) -> EmbeddingVector {
    assert!(dimension >= 2, "embedding dimension must be at least 2");
    let mut values = vec![0.0f64; dimension];
    for token in tokens {
        for feature in subword_features(token.as_ref()) {
            let hash = fnv1a64(feature.as_bytes());
            let bucket = (hash % dimension as u64) as usize;
            values[bucket] += if hash >> 63 == 0 { 1.0 } else { -1.0 };
        }
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    EmbeddingVector { values, norm }
}
