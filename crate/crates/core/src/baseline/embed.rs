use super::BaselineError;
use crate::mapdata::NearbyPlace;
use crate::rng::fnv1a64;

/// Turns text into a fixed-width vector. Learned models plug in here.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>, BaselineError>;
}

/// Bag of words with the hashing trick: each lowercased alphanumeric token
/// adds 1 to bucket `fnv1a64(token) % dim`.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    dim: usize,
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding width must be positive");
        Self { dim }
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self::new(32)
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn name(&self) -> &str {
        "hashing"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, BaselineError> {
        let mut v = vec![0.0; self.dim];
        for token in text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            let bucket = fnv1a64(token.to_lowercase().as_bytes()) % self.dim as u64;
            v[bucket as usize] += 1.0;
        }
        Ok(v)
    }
}

/// Address followed by the nearby place names, space separated.
pub fn embedding_text(address: Option<&str>, nearby: &[NearbyPlace]) -> String {
    let mut parts: Vec<&str> = address.into_iter().collect();
    parts.extend(nearby.iter().map(|p| p.name.as_str()));
    parts.join(" ")
}
