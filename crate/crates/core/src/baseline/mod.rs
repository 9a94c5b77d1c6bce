//! Non-language-model baselines: k-nearest-neighbour averaging and
//! gradient-boosted regression trees over prompt-derived features.

mod embed;
mod features;
mod gbt;
mod knn;

pub use embed::{embedding_text, EmbeddingProvider, HashingEmbedder};
pub use features::{FeatureVector, BASE_FEATURE_WIDTH, NEARBY_SLOTS};
pub use gbt::{gbt_fit, gbt_predict, GbtConfig, GbtModel, Node, Tree, GBT_FORMAT_VERSION};
pub use knn::{knn_predict, KnnRegressor, LabeledPoint, DEFAULT_K};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("need at least {need} training samples, got {got}")]
    InsufficientTrainingData { need: usize, got: usize },
    #[error("feature width {got} does not match model width {expected}")]
    FeatureWidthMismatch { expected: usize, got: usize },
    #[error("non-finite value in training data at row {0}")]
    NonFinite(usize),
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("model format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
