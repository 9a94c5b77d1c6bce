//! Metrics on the bin scale, evaluation reports, error maps and result tables.

mod errormap;
mod metrics;
mod report;
mod table;

pub use errormap::{emit_error_map, parse_geojson, write_error_csv, write_geojson, ErrorMapRow};
pub use metrics::{mae, median, median_split_bias, pearson_r2};
pub use report::{evaluate, EvalReport, SliceReport};
pub use table::{results_table, ResultCell, ResultsGrid, ResultsRow};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("zero variance: r² is undefined")]
    ZeroVariance,
    #[error("no pairs to evaluate")]
    EmptyInput,
    #[error("need at least {need} pairs, got {got}")]
    TooFewPairs { need: usize, got: usize },
    #[error("{preds} predictions but {truths} truths")]
    LengthMismatch { preds: usize, truths: usize },
    #[error("prediction for unknown id {0:?}")]
    UnknownId(String),
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
