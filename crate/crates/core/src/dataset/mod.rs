//! Task datasets and everything between raw values and the corpus files:
//! population-weighted sampling, leak-checked splits, jitter simulation,
//! ZIP centroids and the JSONL import/export boundary.

mod centroid;
mod corpus;
mod jitter;
mod labels;
mod sampling;
mod split;
mod task;

pub use centroid::zip_centroid;
pub use corpus::{
    export_corpus, export_fewshot, import_predictions, read_corpus, read_predictions, write_corpus, CorpusFormat, CorpusRecord, Outcome, SplitTag,
};
pub use jitter::{jitter_coordinates, jitter_dataset, ClusterKind, JitterRadii};
pub use labels::{label_plan, PlanLabels};
pub use sampling::{importance_sample, importance_sample_indices, sample_raster_dataset};
pub use split::{check_overlap, make_splits, SplitPlan, DEFAULT_EVAL_SIZE, DEFAULT_SUBSET_SIZES};
pub use task::{Sample, SourceKind, TaskDataset};

use thiserror::Error;

use crate::label::LabelError;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("need {need} cells with positive weight, found {got}")]
    InsufficientCells { need: usize, got: usize },
    #[error("need at least {need} samples, dataset has {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("training coordinates overlap evaluation coordinates: {}", ids.join(", "))]
    OverlapDetected { ids: Vec<String> },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("unknown id {0:?}")]
    UnknownId(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("no prompt for id {0:?}")]
    MissingPrompt(String),
    #[error("line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
